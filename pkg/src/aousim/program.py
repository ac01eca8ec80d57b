"""Per-round convex program: expected-AoU objective and smooth constraints.

Decision coordinates, packed flat in this fixed order (stable, documented):

    a   (I*U)  device->UAV association probabilities, row-major by device
    b   (U)    UAV->BS selection probabilities
    w   (3*U)  UAV positions, xyz per UAV
    t1  (I*U)  inverse-square-distance slacks for device links
    t2  (U)    inverse-square-distance slacks for UAV->BS links

The product slacks t = a_prev * b are eliminated analytically: with realized
0/1 previous associations their envelope degenerates to an equality, which
has no barrier interior; the objective folds the products into the linear b
coefficients instead, and the unpacked DecisionVector reports t = a_prev * b.

Rate constraints follow the slack reformulation with base-2 exponentials:

    (2^(rate_threshold / (p * bandwidth)) - 1) / C  <=  slack

coupled to geometry through a tangent inner-approximation of slack <= 1/d^2
at the previous round's position.  The literal coupling t1 <= 1/d^2 is not
jointly convex in (position, slack) (1/d^2 has indefinite curvature in the
position), so we use the first-order lower bound of the convex map
y -> 1/y at y_prev = d^2(w_prev):

    slack + (y(w) - y_prev)/y_prev^2 - 1/y_prev <= 0

which is convex (quadratic in w, affine in the slack), tight at w_prev, and
implies slack <= 1/d^2(w) everywhere, so any feasible point satisfies the
original rate constraint.  Collision avoidance uses the analogous tangent of
the distance itself, an affine global lower bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .energy import hover_power, propulsion_power
from .scenario import ScenarioConfig

LN2 = math.log(2.0)


class ProgramError(ValueError):
    """Raised when a round program cannot be assembled from the given state."""


class DegeneratePairError(ProgramError):
    """Two previous UAV positions coincide; the collision cut is undefined."""


# ---------------------------------------------------------------------------
# Packing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Packing:
    """Index map between named decision coordinates and the flat vector."""

    n_devices: int
    n_uavs: int

    @property
    def n(self) -> int:
        iu = self.n_devices * self.n_uavs
        return 2 * iu + 5 * self.n_uavs

    @property
    def a_offset(self) -> int:
        return 0

    @property
    def b_offset(self) -> int:
        return self.n_devices * self.n_uavs

    @property
    def w_offset(self) -> int:
        return self.b_offset + self.n_uavs

    @property
    def t1_offset(self) -> int:
        return self.w_offset + 3 * self.n_uavs

    @property
    def t2_offset(self) -> int:
        return self.t1_offset + self.n_devices * self.n_uavs

    def a_index(self, i: int, u: int) -> int:
        return self.a_offset + i * self.n_uavs + u

    def b_index(self, u: int) -> int:
        return self.b_offset + u

    def w_indices(self, u: int) -> np.ndarray:
        base = self.w_offset + 3 * u
        return np.array([base, base + 1, base + 2])

    def t1_index(self, i: int, u: int) -> int:
        return self.t1_offset + i * self.n_uavs + u

    def t2_index(self, u: int) -> int:
        return self.t2_offset + u


@dataclass(frozen=True)
class DecisionVector:
    """Named view of one solution of the round program."""

    a: np.ndarray    # (I, U)
    b: np.ndarray    # (U,)
    w: np.ndarray    # (U, 3)
    t: np.ndarray    # (I, U) products a_prev * b
    t1: np.ndarray   # (I, U)
    t2: np.ndarray   # (U,)

    @staticmethod
    def from_flat(x: np.ndarray, packing: Packing, a_prev: np.ndarray) -> "DecisionVector":
        ndev, nuav = packing.n_devices, packing.n_uavs
        iu = ndev * nuav
        a = x[packing.a_offset:packing.a_offset + iu].reshape(ndev, nuav).copy()
        b = x[packing.b_offset:packing.b_offset + nuav].copy()
        w = x[packing.w_offset:packing.w_offset + 3 * nuav].reshape(nuav, 3).copy()
        t1 = x[packing.t1_offset:packing.t1_offset + iu].reshape(ndev, nuav).copy()
        t2 = x[packing.t2_offset:packing.t2_offset + nuav].copy()
        t = np.asarray(a_prev, dtype=float) * b[np.newaxis, :]
        return DecisionVector(a=a, b=b, w=w, t=t, t1=t1, t2=t2)


# ---------------------------------------------------------------------------
# Round context
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RoundContext:
    """Known constants for one receding-horizon round.

    ages_cur holds the device ages entering the round (the current state);
    ages_prev and assoc_prev describe the batch each UAV is holding (ages at
    collection time and the realized 0/1 associations that collected it);
    w_prev anchors every linearization; the link constants C fold transmit
    power, fading power and reference gain over noise, so SNR = C / d^2.
    """

    ages_cur: np.ndarray         # (I, U)
    ages_prev: np.ndarray        # (I, U)
    assoc_prev: np.ndarray       # (I, U) 0/1
    w_prev: np.ndarray           # (U, 3)
    device_link_const: np.ndarray  # (I, U)
    uav_link_const: np.ndarray     # (U,)

    @property
    def pending_minus_one(self) -> np.ndarray:
        """Per-UAV pending age mass sum_i T_prev * A_prev."""
        return (self.ages_prev * self.assoc_prev).sum(axis=0)


def make_round_context(cfg: ScenarioConfig, ages_cur: np.ndarray,
                       ages_prev: np.ndarray, assoc_prev: np.ndarray,
                       w_prev: np.ndarray,
                       device_fading_power: np.ndarray | None = None,
                       uav_fading_power: np.ndarray | None = None) -> RoundContext:
    ndev, nuav = cfg.n_devices, cfg.n_uavs
    if device_fading_power is None:
        device_fading_power = np.ones((ndev, nuav))
    if uav_fading_power is None:
        uav_fading_power = np.ones(nuav)
    dev_p = np.array([d.tx_power for d in cfg.devices])
    uav_p = np.array([u.tx_power for u in cfg.uavs])
    dev_c = dev_p[:, None] * device_fading_power * cfg.ref_gain / cfg.noise_power
    uav_c = uav_p * uav_fading_power * cfg.ref_gain / cfg.noise_power
    return RoundContext(
        ages_cur=np.asarray(ages_cur, dtype=float),
        ages_prev=np.asarray(ages_prev, dtype=float),
        assoc_prev=np.asarray(assoc_prev, dtype=float),
        w_prev=np.asarray(w_prev, dtype=float),
        device_link_const=dev_c,
        uav_link_const=uav_c,
    )


# ---------------------------------------------------------------------------
# Constraint blocks.  Each block evaluates a family of inequalities g(x) <= 0
# in vectorized form and exposes compact per-row gradients/Hessians so the
# solver can scatter them cheaply.
# ---------------------------------------------------------------------------

class LinearBlock:
    """Rows g_j = sum_k vals[j,k] * x[cols[j,k]] - rhs[j]."""

    def __init__(self, family: str, cols: np.ndarray, vals: np.ndarray,
                 rhs: np.ndarray):
        self.family = family
        self.cols = np.asarray(cols, dtype=int)
        self.lin_vals = np.asarray(vals, dtype=float)
        self.rhs = np.asarray(rhs, dtype=float)
        self.m = self.rhs.shape[0]

    def values(self, x: np.ndarray) -> np.ndarray:
        return (x[self.cols] * self.lin_vals).sum(axis=1) - self.rhs

    def grads(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self.cols, np.broadcast_to(self.lin_vals, self.cols.shape).copy()

    def hess_compact(self, x: np.ndarray, lin_w: np.ndarray):
        return None


class ExpRateBlock:
    """Rows g_j = (exp(eta_j / x[p_j]) - 1) * inv_c_j - x[s_j].

    eta = ln2 * rate_threshold / bandwidth, so exp(eta/p) = 2^(threshold/(p*B)).
    Convex for p > 0; evaluates to +inf outside that domain or on overflow,
    which the barrier line search rejects.
    """

    def __init__(self, family: str, prob_cols: np.ndarray, slack_cols: np.ndarray,
                 eta: np.ndarray, inv_c: np.ndarray):
        self.family = family
        self.prob_cols = np.asarray(prob_cols, dtype=int)
        self.slack_cols = np.asarray(slack_cols, dtype=int)
        self.eta = np.asarray(eta, dtype=float)
        self.inv_c = np.asarray(inv_c, dtype=float)
        self.m = self.eta.shape[0]
        self.cols = np.stack([self.prob_cols, self.slack_cols], axis=1)

    def _exp(self, p: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore", divide="ignore"):
            e = np.exp(self.eta / np.maximum(p, 1e-300))
        return np.where(p > 0, e, np.inf)

    def values(self, x: np.ndarray) -> np.ndarray:
        p = x[self.prob_cols]
        s = x[self.slack_cols]
        with np.errstate(invalid="ignore"):
            return (self._exp(p) - 1.0) * self.inv_c - s

    def grads(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        p = x[self.prob_cols]
        e = self._exp(p)
        dp = -self.eta / p**2 * e * self.inv_c
        vals = np.stack([dp, -np.ones(self.m)], axis=1)
        return self.cols, vals

    def hess_compact(self, x: np.ndarray, lin_w: np.ndarray):
        p = x[self.prob_cols]
        e = self._exp(p)
        d2 = (self.eta**2 / p**4 + 2.0 * self.eta / p**3) * e * self.inv_c
        cols = self.prob_cols[:, None]
        blocks = (lin_w * d2)[:, None, None]
        return cols, blocks


class CouplingBlock:
    """Tangent coupling of a slack to the inverse squared anchor distance.

    g_j = x[s_j] + (y_j(w) - ybar_j)/ybar_j^2 - 1/ybar_j,
    y_j(w) = ||w_uj - anchor_j||^2, ybar_j = y_j(w_prev).
    """

    def __init__(self, family: str, slack_cols: np.ndarray, w_cols: np.ndarray,
                 anchors: np.ndarray, ybar: np.ndarray):
        self.family = family
        self.slack_cols = np.asarray(slack_cols, dtype=int)
        self.w_cols = np.asarray(w_cols, dtype=int)        # (m, 3)
        self.anchors = np.asarray(anchors, dtype=float)    # (m, 3)
        self.ybar = np.asarray(ybar, dtype=float)
        self.m = self.ybar.shape[0]
        self.cols = np.concatenate([self.slack_cols[:, None], self.w_cols], axis=1)

    def values(self, x: np.ndarray) -> np.ndarray:
        w = x[self.w_cols]
        y = ((w - self.anchors) ** 2).sum(axis=1)
        return x[self.slack_cols] + (y - self.ybar) / self.ybar**2 - 1.0 / self.ybar

    def grads(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        w = x[self.w_cols]
        dw = 2.0 * (w - self.anchors) / self.ybar[:, None] ** 2
        vals = np.concatenate([np.ones((self.m, 1)), dw], axis=1)
        return self.cols, vals

    def hess_compact(self, x: np.ndarray, lin_w: np.ndarray):
        scale = 2.0 * lin_w / self.ybar**2
        blocks = scale[:, None, None] * np.eye(3)[None, :, :]
        return self.w_cols, blocks


class BallBlock:
    """Rows g_j = ||w_uj - center_j||^2 - radius_j^2."""

    def __init__(self, family: str, w_cols: np.ndarray, centers: np.ndarray,
                 radius_sq: np.ndarray):
        self.family = family
        self.w_cols = np.asarray(w_cols, dtype=int)
        self.centers = np.asarray(centers, dtype=float)
        self.radius_sq = np.asarray(radius_sq, dtype=float)
        self.m = self.radius_sq.shape[0]
        self.cols = self.w_cols

    def values(self, x: np.ndarray) -> np.ndarray:
        w = x[self.w_cols]
        return ((w - self.centers) ** 2).sum(axis=1) - self.radius_sq

    def grads(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self.cols, 2.0 * (x[self.w_cols] - self.centers)

    def hess_compact(self, x: np.ndarray, lin_w: np.ndarray):
        blocks = 2.0 * lin_w[:, None, None] * np.eye(3)[None, :, :]
        return self.w_cols, blocks


class ConstBlock:
    """Constant rows; used to surface structurally infeasible requirements."""

    def __init__(self, family: str, const: np.ndarray):
        self.family = family
        self.const = np.asarray(const, dtype=float)
        self.m = self.const.shape[0]
        self.cols = np.zeros((self.m, 1), dtype=int)

    def values(self, x: np.ndarray) -> np.ndarray:
        return self.const.copy()

    def grads(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self.cols, np.zeros((self.m, 1))

    def hess_compact(self, x: np.ndarray, lin_w: np.ndarray):
        return None


# ---------------------------------------------------------------------------
# Program container
# ---------------------------------------------------------------------------

@dataclass
class ConvexProgram:
    """Linear objective, smooth convex inequality blocks, per-coordinate box."""

    packing: Packing
    obj_const: float
    obj_lin: np.ndarray
    blocks: list = field(default_factory=list)
    bounds_lo: np.ndarray = None
    bounds_hi: np.ndarray = None

    @property
    def n(self) -> int:
        return self.obj_lin.shape[0]

    @property
    def m(self) -> int:
        return sum(b.m for b in self.blocks)

    def objective_value(self, x: np.ndarray) -> float:
        return float(self.obj_const + self.obj_lin @ x)

    def constraint_values(self, x: np.ndarray) -> np.ndarray:
        if not self.blocks:
            return np.empty(0)
        return np.concatenate([b.values(x) for b in self.blocks])

    def constraint_jacobian(self, x: np.ndarray) -> np.ndarray:
        """Dense m x n Jacobian; test/diagnostic path, not used by the solver."""
        jac = np.zeros((self.m, self.n))
        row = 0
        for b in self.blocks:
            cols, vals = b.grads(x)
            for j in range(b.m):
                np.add.at(jac[row + j], cols[j], vals[j])
            row += b.m
        return jac

    def family_slices(self) -> list[tuple[str, slice]]:
        out, row = [], 0
        for b in self.blocks:
            out.append((b.family, slice(row, row + b.m)))
            row += b.m
        return out


# ---------------------------------------------------------------------------
# Constraint emitters
# ---------------------------------------------------------------------------

def device_rate_constraint(i: int, u: int, ctx: RoundContext,
                           cfg: ScenarioConfig) -> tuple[ExpRateBlock, CouplingBlock]:
    """QoS pair for one device link: exponential rate row + tangent coupling."""
    pk = Packing(cfg.n_devices, cfg.n_uavs)
    dev = cfg.devices[i]
    c = ctx.device_link_const[i, u]
    if c <= 0:
        raise ProgramError(f"device link constant must be > 0 for pair ({i},{u})")
    eta = LN2 * cfg.rate_threshold_device / dev.bandwidth
    exp_block = ExpRateBlock(
        "device_rate", np.array([pk.a_index(i, u)]), np.array([pk.t1_index(i, u)]),
        np.array([eta]), np.array([1.0 / c]))
    anchor = dev.position.array()
    ybar = float(((ctx.w_prev[u] - anchor) ** 2).sum())
    if ybar <= 1e-12:
        raise ProgramError(f"uav {u} previous position coincides with device {i}")
    coup_block = CouplingBlock(
        "device_coupling", np.array([pk.t1_index(i, u)]), pk.w_indices(u)[None, :],
        anchor[None, :], np.array([ybar]))
    return exp_block, coup_block


def uav_rate_constraint(u: int, ctx: RoundContext,
                        cfg: ScenarioConfig) -> tuple[ExpRateBlock, CouplingBlock]:
    """QoS pair for one UAV->BS link; mirrors the device pair."""
    pk = Packing(cfg.n_devices, cfg.n_uavs)
    uav = cfg.uavs[u]
    c = ctx.uav_link_const[u]
    if c <= 0:
        raise ProgramError(f"uav link constant must be > 0 for uav {u}")
    eta = LN2 * cfg.rate_threshold_uav / uav.bandwidth
    exp_block = ExpRateBlock(
        "uav_rate", np.array([pk.b_index(u)]), np.array([pk.t2_index(u)]),
        np.array([eta]), np.array([1.0 / c]))
    anchor = cfg.bs_position.array()
    ybar = float(((ctx.w_prev[u] - anchor) ** 2).sum())
    if ybar <= 1e-12:
        raise ProgramError(f"uav {u} previous position coincides with the BS")
    coup_block = CouplingBlock(
        "uav_coupling", np.array([pk.t2_index(u)]), pk.w_indices(u)[None, :],
        anchor[None, :], np.array([ybar]))
    return exp_block, coup_block


def collision_constraints(w_prev: np.ndarray, min_separation: float,
                          packing: Packing) -> LinearBlock | None:
    """Affine separation cuts, one per unordered UAV pair.

    The distance tangent at the previous positions, e^T (w_u - w_v) with
    e the previous unit offset, lower-bounds the true distance, so feasible
    points keep every pair at least min_separation apart.
    """
    nuav = packing.n_uavs
    if nuav < 2:
        return None
    cols, vals, rhs = [], [], []
    for u in range(nuav):
        for v in range(u + 1, nuav):
            delta = w_prev[u] - w_prev[v]
            norm = float(np.linalg.norm(delta))
            if norm <= 1e-12:
                raise DegeneratePairError(
                    f"uavs {u} and {v} share previous position {w_prev[u]}")
            e = delta / norm
            cols.append(np.concatenate([packing.w_indices(u), packing.w_indices(v)]))
            vals.append(np.concatenate([-e, e]))
            rhs.append(-min_separation)
    return LinearBlock("collision", np.array(cols), np.array(vals), np.array(rhs))


def energy_constraint(u: int, ctx: RoundContext, cfg: ScenarioConfig):
    """Per-round energy cap as a convex region over w_u.

    The slot energy is (P_fly - P_hover - P_tx)/speed * ||w - w_prev|| plus
    the constant hover+transmit cost.  When flying is costlier the cap is a
    ball around w_prev (emitted in squared-radius form, which describes the
    same set smoothly); when flying is cheaper the cap reduces to the hover
    cost check; an impossible hover cost is emitted as a constant violation
    so phase-I reports infeasibility.
    """
    pk = Packing(cfg.n_devices, cfg.n_uavs)
    uav = cfg.uavs[u]
    tau = cfg.slot_duration
    p_fly = propulsion_power(uav.speed, uav.rotor)
    p_rest = hover_power(uav.rotor) + uav.tx_power
    hover_cost = p_rest * tau
    slope = (p_fly - p_rest) / uav.speed     # joules per meter of displacement
    if hover_cost > uav.energy_budget:
        return ConstBlock("energy", np.array([hover_cost - uav.energy_budget]))
    if slope <= 0:
        return None                           # energy maximal at zero displacement
    radius = (uav.energy_budget - hover_cost) / slope
    return BallBlock("energy", pk.w_indices(u)[None, :], ctx.w_prev[u][None, :],
                     np.array([radius**2]))


def travel_constraint(u: int, ctx: RoundContext, cfg: ScenarioConfig) -> BallBlock:
    """The move must fit the slot: ||w - w_prev||^2 <= (speed * slot)^2."""
    pk = Packing(cfg.n_devices, cfg.n_uavs)
    reach = cfg.uavs[u].speed * cfg.slot_duration
    return BallBlock("travel", pk.w_indices(u)[None, :], ctx.w_prev[u][None, :],
                     np.array([reach**2]))


def product_link_constraints(a_prev: float, b_col: int, t_col: int,
                             n: int) -> LinearBlock:
    """Bilinear-product envelope for t = a_prev * b over the unit square.

    Emits t <= a_prev, t <= b, t >= a_prev + b - 1, t >= 0 as four affine
    rows in an n-dimensional space.  With a realized 0/1 a_prev the envelope
    pins t = a_prev * b exactly, which is why the assembled round program
    substitutes the product instead of carrying these rows.
    """
    cols = np.array([[t_col, b_col]] * 4)
    vals = np.array([
        [1.0, 0.0],    # t - a_prev <= 0
        [1.0, -1.0],   # t - b <= 0
        [-1.0, 1.0],   # a_prev + b - 1 - t <= 0
        [-1.0, 0.0],   # -t <= 0
    ])
    rhs = np.array([float(a_prev), 0.0, 1.0 - float(a_prev), 0.0])
    return LinearBlock("product_envelope", cols, vals, rhs)


def simplex_constraints(packing: Packing) -> LinearBlock:
    """Per-device cap: association probabilities over UAVs sum to at most one."""
    cols = np.array([[packing.a_index(i, u) for u in range(packing.n_uavs)]
                     for i in range(packing.n_devices)])
    vals = np.ones_like(cols, dtype=float)
    rhs = np.ones(packing.n_devices)
    return LinearBlock("simplex", cols, vals, rhs)


# ---------------------------------------------------------------------------
# Assembly
# ---------------------------------------------------------------------------

def _merge_exp(blocks: list[ExpRateBlock], family: str) -> ExpRateBlock:
    return ExpRateBlock(
        family,
        np.concatenate([b.prob_cols for b in blocks]),
        np.concatenate([b.slack_cols for b in blocks]),
        np.concatenate([b.eta for b in blocks]),
        np.concatenate([b.inv_c for b in blocks]),
    )


def _merge_coupling(blocks: list[CouplingBlock], family: str) -> CouplingBlock:
    return CouplingBlock(
        family,
        np.concatenate([b.slack_cols for b in blocks]),
        np.concatenate([b.w_cols for b in blocks]),
        np.concatenate([b.anchors for b in blocks]),
        np.concatenate([b.ybar for b in blocks]),
    )


def _merge_balls(blocks: list[BallBlock], family: str) -> BallBlock:
    return BallBlock(
        family,
        np.concatenate([b.w_cols for b in blocks]),
        np.concatenate([b.centers for b in blocks]),
        np.concatenate([b.radius_sq for b in blocks]),
    )


def assemble_round_program(ctx: RoundContext, cfg: ScenarioConfig) -> ConvexProgram:
    """Build the solvable program for one round from realized state.

    Objective (minimize): expected base-station AoU with previous
    associations realized, plus lambda_dev times the device-freshness sum,
    dropping nothing: constants are kept so the reported objective equals the
    modeled expected AoU total.
    """
    if abs(cfg.pathloss_exponent - 2.0) > 1e-12:
        raise ProgramError("the rate reformulation requires pathloss_exponent = 2")
    ndev, nuav = cfg.n_devices, cfg.n_uavs
    pk = Packing(ndev, nuav)
    n = pk.n

    ages_cur = ctx.ages_cur                            # (I, U)
    pend = ctx.pending_minus_one                       # (U,)
    lam = cfg.lambda_dev

    obj_lin = np.zeros(n)
    for i in range(ndev):
        for u in range(nuav):
            obj_lin[pk.a_index(i, u)] = -lam * (ages_cur[i, u] + 1.0)
    for u in range(nuav):
        obj_lin[pk.b_index(u)] = -(ndev + pend[u])
    obj_const = (float((ctx.ages_prev * ctx.assoc_prev).sum())
                 + ndev * nuav
                 + lam * float((ages_cur + 1.0).sum()))

    exp_dev, coup_dev = [], []
    for i in range(ndev):
        for u in range(nuav):
            eb, cb = device_rate_constraint(i, u, ctx, cfg)
            exp_dev.append(eb)
            coup_dev.append(cb)
    exp_uav, coup_uav = [], []
    for u in range(nuav):
        eb, cb = uav_rate_constraint(u, ctx, cfg)
        exp_uav.append(eb)
        coup_uav.append(cb)

    blocks = [
        _merge_exp(exp_dev, "device_rate"),
        _merge_coupling(coup_dev, "device_coupling"),
        _merge_exp(exp_uav, "uav_rate"),
        _merge_coupling(coup_uav, "uav_coupling"),
        simplex_constraints(pk),
    ]
    coll = collision_constraints(ctx.w_prev, cfg.min_separation, pk)
    if coll is not None:
        blocks.append(coll)
    blocks.append(_merge_balls([travel_constraint(u, ctx, cfg) for u in range(nuav)],
                               "travel"))
    energy_balls, energy_consts = [], []
    for u in range(nuav):
        eb = energy_constraint(u, ctx, cfg)
        if isinstance(eb, BallBlock):
            energy_balls.append(eb)
        elif isinstance(eb, ConstBlock):
            energy_consts.append(eb)
    if energy_balls:
        blocks.append(_merge_balls(energy_balls, "energy"))
    blocks.extend(energy_consts)

    lo = np.zeros(n)
    hi = np.zeros(n)
    iu = ndev * nuav
    lo[pk.a_offset:pk.a_offset + iu] = 0.0
    hi[pk.a_offset:pk.a_offset + iu] = 1.0
    lo[pk.b_offset:pk.b_offset + nuav] = 0.0
    hi[pk.b_offset:pk.b_offset + nuav] = 1.0
    box_lo, box_hi = cfg.box.lows(), cfg.box.highs()
    for u in range(nuav):
        lo[pk.w_indices(u)] = box_lo
        hi[pk.w_indices(u)] = box_hi
    slack_hi = 1.0 / cfg.box.z[0] ** 2
    lo[pk.t1_offset:pk.t1_offset + iu] = 0.0
    hi[pk.t1_offset:pk.t1_offset + iu] = slack_hi
    lo[pk.t2_offset:pk.t2_offset + nuav] = 0.0
    hi[pk.t2_offset:pk.t2_offset + nuav] = slack_hi

    return ConvexProgram(packing=pk, obj_const=obj_const, obj_lin=obj_lin,
                         blocks=blocks, bounds_lo=lo, bounds_hi=hi)
