"""
Seeded instance generators and deterministic runners for the experiment commands
"""
import logging
import math
from typing import Any, Callable, Dict, List, NamedTuple, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.stats

from src.config import settings
from src.models.binary import DoublingPointSet
from src.models.exponentials import IntervalUnion
from src.models.frames import VectorSystem
from src.models.linalg import BlockDiagonalPsd, HermitianMatrix, PsdMatrix
from src.models.polynomial import RealPolynomial
from src.models.sampling import WeightedOperatorFamily
from src.models.schemas import Command
from src.models.selection import SelectorInstance
from src.services.binary_selector_service import BinarySelectorService
from src.services.discretization_service import DiscretizationService
from src.services.exponential_service import ExponentialService
from src.services.frame_service import FrameService
from src.services.linalg_service import LinalgService
from src.services.mcp_service import McpService
from src.services.metric_service import MetricService
from src.services.selector_service import SelectorService
from src.utils.errors import ConfigError, HypothesisError

logger = logging.getLogger(__name__)


class Outcome(NamedTuple):
    """Result JSON, CSV tables by file name and the achieved/promised pair for the summary line"""
    result: Dict[str, Any]
    tables: Dict[str, str]
    achieved: Any
    promised: Any


# Random builders

def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    return scipy.stats.unitary_group.rvs(d, random_state=rng) if d > 1 else np.eye(1, dtype=np.complex128)


def random_psd(rng: np.random.Generator, d: int, rank: int = None, trace: float = None) -> np.ndarray:
    k = d if rank is None else rank
    x = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    a = x @ x.conj().T
    if trace is not None:
        a = a * (trace / np.real(np.trace(a)))
    return (a + a.conj().T) / 2


def random_hermitian(rng: np.random.Generator, d: int) -> np.ndarray:
    x = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (x + x.conj().T) / 2


def harmonic_frame(rng: np.random.Generator, n: int, d: int) -> VectorSystem:
    """Rows of d random columns of the unitary DFT: Parseval in C^d with ‖u_i‖² = d/n"""
    if not 1 <= d <= n:
        raise HypothesisError(f"A harmonic frame needs 1 ≤ d ≤ n, got d={d}, n={n}", reason="invalid_parameter")
    cols = np.sort(rng.choice(n, size=d, replace=False))
    f = scipy.linalg.dft(n) / math.sqrt(n)
    return VectorSystem(dim=d, vectors=f[:, cols])


def _matrices(instance: Dict[str, Any]) -> List[np.ndarray]:
    return [HermitianMatrix.from_json(m).entries for m in instance["matrices"]]


def _consecutive(n: int, size: int) -> List[Tuple[int, ...]]:
    return [tuple(range(k, k + size)) for k in range(0, n - size + 1, size)]


def _rank_one_instance(frame: VectorSystem, blocks: Sequence[Sequence[int]]) -> SelectorInstance:
    ops = {i: PsdMatrix.rank_one(u) for i, u in enumerate(frame.vectors)}
    return SelectorInstance(
        ground=tuple(range(frame.n)),
        operators=ops,
        blocks=tuple(tuple(b) for b in blocks),
        epsilon=float(np.max(frame.norms_squared())),
    )


# mcp

def _gen_mcp_eval(p: Dict[str, Any], rng: np.random.Generator) -> Dict[str, Any]:
    build = (lambda: random_psd(rng, p["dim"], trace=1.0)) if p["psd"] else (lambda: random_hermitian(rng, p["dim"]))
    mats = [HermitianMatrix.from_array(build()).to_json() for _ in range(p["count"])]
    return {"dim": p["dim"], "matrices": mats, "oracle": p["oracle"]}


def _run_mcp_eval(instance: Dict[str, Any]) -> Outcome:
    mats = _matrices(instance)
    poly = McpService.mcp(mats, dim=instance["dim"])
    result: Dict[str, Any] = {"mcp": poly.to_json()}
    diff = None
    if instance["oracle"]:
        oracle = McpService.mcp_oracle(mats, dim=instance["dim"])
        n = max(len(poly.coeffs), len(oracle.coeffs))
        a, b = np.zeros(n), np.zeros(n)
        a[: len(poly.coeffs)] = poly.coeffs
        b[: len(oracle.coeffs)] = oracle.coeffs
        diff = float(np.max(np.abs(a - b)))
        result.update({"oracle": oracle.to_json(), "max_coeff_diff": diff})
    return Outcome(result, {}, diff, settings.TOL_EQ if diff is not None else None)


def _gen_mcp_maxroot(p: Dict[str, Any], rng: np.random.Generator) -> Dict[str, Any]:
    if p["matrices"] is not None:
        mats = [HermitianMatrix.from_array(np.asarray(m, dtype=float)).to_json() for m in p["matrices"]]
    elif p["identity"]:
        mats = [HermitianMatrix.identity(p["dim"]).to_json() for _ in range(p["count"])]
    else:
        mats = [HermitianMatrix.from_array(random_psd(rng, p["dim"], trace=1.0)).to_json() for _ in range(p["count"])]
    return {"dim": HermitianMatrix.from_json(mats[0]).dim, "matrices": mats}


def _run_mcp_maxroot(instance: Dict[str, Any]) -> Outcome:
    poly = McpService.mcp(_matrices(instance), dim=instance["dim"])
    root = McpService.maxroot(poly)
    return Outcome({"mcp": poly.to_json(), "maxroot": root.to_json()}, {}, root.value, None)


# identity suite

def _max_coeff_diff(p: RealPolynomial, q: RealPolynomial) -> float:
    n = max(len(p.coeffs), len(q.coeffs))
    a, b = np.zeros(n), np.zeros(n)
    a[: len(p.coeffs)] = p.coeffs
    b[: len(q.coeffs)] = q.coeffs
    return float(np.max(np.abs(a - b))) if n else 0.0


def _block_estimate_residual(rng: np.random.Generator, max_count: int) -> float:
    """maxroot μ[A^{(j)}] − (maxroot μ[A] − Σ_{l≠j} ε_l) on two 2×2 blocks with constant block traces"""
    m = int(rng.integers(1, max_count + 1))
    eps = [float(e) for e in rng.uniform(0.1, 0.5, size=2)]
    blocks = [[random_psd(rng, 2, rank=int(rng.integers(1, 3)), trace=e) for e in eps] for _ in range(m)]
    full = [scipy.linalg.block_diag(*b) for b in blocks]
    whole = McpService.maxroot(McpService.mcp(full, dim=4)).value
    worst = 0.0
    for j in range(2):
        part = McpService.maxroot(McpService.mcp([b[j] for b in blocks], dim=2)).value
        worst = max(worst, part - (whole - sum(eps) + eps[j]))
    return worst


def _perturbation_residual(rng: np.random.Generator, d: int, m: int) -> float:
    """maxroot μ[A_1+Z_0, ...] − maxroot μ[A_1+Z, ...] with ran Z_0 ⟂ ran A_j and tr Z ≥ tr Z_0"""
    k = int(rng.integers(1, d))
    q = random_unitary(rng, d)
    mats = [q[:, :k] @ random_psd(rng, k, trace=float(rng.uniform(0.2, 1.0))) @ q[:, :k].conj().T for _ in range(m)]
    z0 = q[:, k:] @ random_psd(rng, d - k, trace=float(rng.uniform(0.2, 1.0))) @ q[:, k:].conj().T
    z = random_psd(rng, d, trace=LinalgService.trace(z0) * float(rng.uniform(1.0, 1.5)))
    low = McpService.maxroot(McpService.mcp([mats[0] + z0] + mats[1:], dim=d)).value
    high = McpService.maxroot(McpService.mcp([mats[0] + z] + mats[1:], dim=d)).value
    return max(0.0, low - high)


def identity_suite(rng: np.random.Generator, trials: int, max_dim: int = 4, max_count: int = 4) -> Dict[str, Dict[str, Any]]:
    """
    Residuals of the algebraic identities and inequalities of μ on random families

    Identities report max coefficient differences; inequalities report the
    largest amount by which the left side exceeds the right side.
    """
    residuals: Dict[str, List[float]] = {
        name: [] for name in (
            "multi_affinity", "symmetry", "unitary_invariance", "shift", "orthogonal_product",
            "maxroot_equals_trace", "norm_bound", "root_bound", "monotonicity", "block_estimate", "perturbation",
        )
    }
    for _ in range(trials):
        d = int(rng.integers(2, max_dim + 1))
        m = int(rng.integers(1, max_count + 1))
        mats = [random_psd(rng, d, rank=int(rng.integers(1, d + 1)), trace=float(rng.uniform(0.2, 1.0))) for _ in range(m)]
        mcp = McpService.mcp(mats, dim=d)

        s = float(rng.uniform())
        other = random_psd(rng, d, trace=float(rng.uniform(0.2, 1.0)))
        mixed = McpService.mcp([s * mats[0] + (1 - s) * other] + mats[1:], dim=d)
        split = McpService.mcp(mats, dim=d).scaled(s) + McpService.mcp([other] + mats[1:], dim=d).scaled(1 - s)
        residuals["multi_affinity"].append(_max_coeff_diff(mixed, split))

        perm = rng.permutation(m)
        residuals["symmetry"].append(_max_coeff_diff(mcp, McpService.mcp([mats[k] for k in perm], dim=d)))

        u = random_unitary(rng, d)
        residuals["unitary_invariance"].append(
            _max_coeff_diff(mcp, McpService.mcp([u @ a @ u.conj().T for a in mats], dim=d))
        )

        if m <= d:
            shift = float(rng.uniform(0.1, 1.0))
            augmented = []
            for i, a in enumerate(mats):
                e = np.zeros((m, m))
                e[i, i] = shift
                augmented.append(scipy.linalg.block_diag(e, a))
            lhs = McpService.reduced_mcp(augmented, d + m)
            rhs = McpService.reduced_mcp(mats, d).shifted(shift)
            residuals["shift"].append(_max_coeff_diff(lhs, rhs))

        k = int(rng.integers(1, d))
        q = random_unitary(rng, d)
        left = [q[:, :k] @ random_psd(rng, k, trace=1.0) @ q[:, :k].conj().T for _ in range(m)]
        right = [q[:, k:] @ random_psd(rng, d - k, trace=1.0) @ q[:, k:].conj().T for _ in range(int(rng.integers(1, max_count + 1)))]
        lhs = McpService.mcp(left + right, dim=d) * RealPolynomial.monomial(d)
        rhs = McpService.mcp(left, dim=d) * McpService.mcp(right, dim=d)
        residuals["orthogonal_product"].append(_max_coeff_diff(lhs, rhs))

        b = mats[0]
        residuals["maxroot_equals_trace"].append(
            abs(McpService.maxroot(McpService.reduced_mcp([b], d)).value - LinalgService.trace(b))
        )

        root = McpService.maxroot(mcp).value
        residuals["norm_bound"].append(max(0.0, LinalgService.operator_norm(sum(mats)) - root))

        eps = float(rng.uniform(0.05, 0.5))
        scaled = [a * min(eps / LinalgService.trace(a), 1.0) for a in mats]
        top = LinalgService.operator_norm(sum(scaled))
        if top > 1:
            scaled = [a / top for a in scaled]
        # the reduced form drops the structural zero roots before the real-rootedness check
        poly = McpService.reduced_mcp(scaled, d) if m <= d else McpService.mcp(scaled, dim=d)
        bounded = McpService.maxroot(poly)
        eps_max = max(LinalgService.trace(a) for a in scaled)
        over = bounded.value - (1 + math.sqrt(eps_max)) ** 2
        residuals["root_bound"].append(max(0.0, over) if bounded.all_real else math.inf)

        bigger = [a + random_psd(rng, d, rank=1, trace=0.5) for a in mats]
        residuals["monotonicity"].append(max(0.0, root - McpService.maxroot(McpService.mcp(bigger, dim=d)).value))

        residuals["block_estimate"].append(_block_estimate_residual(rng, max_count))
        residuals["perturbation"].append(_perturbation_residual(rng, d, m))

    tol = settings.TOL_ROOT
    return {
        name: {
            "trials": len(vals),
            "max_residual": max(vals) if vals else 0.0,
            "violations": sum(1 for v in vals if v > tol),
        }
        for name, vals in residuals.items()
    }


def _gen_identities(p: Dict[str, Any], rng: np.random.Generator) -> Dict[str, Any]:
    return {"suite_seed": int(rng.integers(0, 2 ** 31 - 1)), **p}


def _run_identities(instance: Dict[str, Any]) -> Outcome:
    rng = np.random.default_rng(instance["suite_seed"])
    report = identity_suite(rng, instance["trials"], instance["max_dim"], instance["max_count"])
    worst = max(r["max_residual"] for r in report.values())
    violations = sum(r["violations"] for r in report.values())
    return Outcome({"identities": report, "violations": violations}, {}, worst, settings.TOL_ROOT)


# selectors

def _gen_weaver(p: Dict[str, Any], rng: np.random.Generator) -> Dict[str, Any]:
    frame = harmonic_frame(rng, p["n"], p["dim"])
    return {"instance": _rank_one_instance(frame, _consecutive(p["n"], p["r"])).to_json(), "r": p["r"]}


def _run_weaver(instance: Dict[str, Any]) -> Outcome:
    cert = SelectorService.weaver_ksr_select(SelectorInstance.from_json(instance["instance"]), instance["r"])
    return Outcome(cert.to_json(), {}, cert.achieved_norm, cert.promised_bound)


def _gen_ks2(p: Dict[str, Any], rng: np.random.Generator) -> Dict[str, Any]:
    if p["n"] % 2:
        raise HypothesisError(f"select-ks2 needs an even n, got {p['n']}", reason="invalid_parameter")
    frame = harmonic_frame(rng, p["n"], p["dim"])
    return {"instance": _rank_one_instance(frame, _consecutive(p["n"], 2)).to_json()}


def _run_ks2(instance: Dict[str, Any]) -> Outcome:
    cert = SelectorService.ks2_select(SelectorInstance.from_json(instance["instance"]))
    return Outcome(cert.to_json(), {}, cert.achieved_norm, cert.promised_bound)


def _gen_block(p: Dict[str, Any], rng: np.random.Generator) -> Dict[str, Any]:
    frames = [harmonic_frame(rng, p["n"], dj) for dj in p["dims"]]
    ops = {
        i: BlockDiagonalPsd.from_blocks([PsdMatrix.rank_one(f.vectors[i]) for f in frames]).assembled()
        for i in range(p["n"])
    }
    block_eps = tuple(dj / p["n"] for dj in p["dims"])
    instance = SelectorInstance(
        ground=tuple(range(p["n"])),
        operators=ops,
        blocks=tuple(_consecutive(p["n"], p["r"])),
        epsilon=max(block_eps),
        block_eps=block_eps,
        block_dims=tuple(p["dims"]),
    )
    return {"instance": instance.to_json(), "r": p["r"]}


def _run_block(instance: Dict[str, Any]) -> Outcome:
    cert = SelectorService.block_weaver_select(SelectorInstance.from_json(instance["instance"]), instance["r"])
    return Outcome(cert.to_json(), {}, cert.achieved_norm, cert.promised_bound)


def _gen_feichtinger(p: Dict[str, Any], rng: np.random.Generator) -> Dict[str, Any]:
    plan = FrameService.feichtinger_block_plan(p["eps"], settings.C_BL)
    n = p["blocks"] * plan.block_size
    systems = [harmonic_frame(rng, n, min(n, math.ceil(e * n - 1e-12))) for e in p["eps"]]
    return {
        "systems": [s.to_json() for s in systems],
        "blocks": [list(b) for b in _consecutive(n, plan.block_size)],
        "eps": list(p["eps"]),
    }


def _run_feichtinger(instance: Dict[str, Any]) -> Outcome:
    systems = [VectorSystem.from_json(s) for s in instance["systems"]]
    cert = FrameService.feichtinger_select(systems, instance["blocks"], eps=instance["eps"])
    return Outcome(cert.to_json(), {}, cert.achieved_norm, cert.promised_bound)


def _gen_r_eps(p: Dict[str, Any], rng: np.random.Generator) -> Dict[str, Any]:
    plan = FrameService.r_eps_block_rule([1.0 / b for b in p["bessel"]], p["epsilon"], p["constant"])
    size = max(plan.block_size, math.ceil(plan.r - 1e-12))
    n = p["blocks"] * size
    systems = []
    for b in p["bessel"]:
        d = min(n, math.ceil(n / b - 1e-12))
        systems.append(harmonic_frame(rng, n, d).scaled(math.sqrt(n / d)))
    return {
        "systems": [s.to_json() for s in systems],
        "blocks": [list(b) for b in _consecutive(n, size)],
        "epsilon": p["epsilon"],
        "constant": p["constant"],
    }


def _run_r_eps(instance: Dict[str, Any]) -> Outcome:
    systems = [VectorSystem.from_json(s) for s in instance["systems"]]
    cert = FrameService.r_eps_select(systems, instance["blocks"], instance["epsilon"], constant=instance["constant"])
    return Outcome(cert.to_json(), {}, cert.achieved_norm, cert.promised_bound)


# binary selectors and metric separation

def _gen_binary_tree(p: Dict[str, Any], rng: np.random.Generator) -> Dict[str, Any]:
    frame = harmonic_frame(rng, p["n"], p["dim"])
    return {"operators": [PsdMatrix.rank_one(u).to_json() for u in frame.vectors], "depth": p["depth"]}


def _run_binary_tree(instance: Dict[str, Any]) -> Outcome:
    ops = [PsdMatrix.from_json(t) for t in instance["operators"]]
    tree = BinarySelectorService.iterate_ks2(ops, instance["depth"])
    delta = max(LinalgService.trace(t.entries) for t in ops)
    bj = BinarySelectorService.bj_sequence(delta, tree.depth)
    worst = max(tree.deviations[b] for b in tree.leaves)
    result = {"tree": tree.to_json(), "bj": bj.to_json(), "worst_leaf_deviation": worst}
    return Outcome(result, {"leaves.csv": tree.leaves_csv()}, worst, tree.bound)


def _gen_metric(p: Dict[str, Any], rng: np.random.Generator) -> Dict[str, Any]:
    return dict(p)


def _run_metric(instance: Dict[str, Any]) -> Outcome:
    space = DoublingPointSet.integer_interval(instance["start"], instance["stop"])
    schedule = MetricService.separated_pair_partitions(space, instance["r"], depth=instance["depth"])
    leaves = {b: [instance["start"] + i for i in ix] for b, ix in schedule.tree.leaf_sets().items()}
    result = {
        "depth": schedule.tree.depth,
        "net_size": len(schedule.net),
        "leaves": leaves,
        "separation": schedule.certificate.to_json(),
    }
    finite = [d for d in schedule.certificate.min_distance.values() if not math.isinf(d)]
    return Outcome(
        result,
        {"separation.csv": schedule.certificate.to_csv(), "leaves.csv": schedule.tree.leaves_csv()},
        min(finite) if finite else None,
        instance["r"],
    )


# discretization

def _gen_scal(p: Dict[str, Any], rng: np.random.Generator) -> Dict[str, Any]:
    d = p["dim"]
    ops = [random_psd(rng, d, rank=1, trace=float(rng.uniform(0.1, 1.0))) for _ in range(p["count"])]
    weights = [float(w) for w in rng.uniform(0.2, 1.0, size=p["count"])]
    total = sum(w * a for w, a in zip(weights, ops))
    norm = LinalgService.operator_norm(total)
    return {
        "operators": [PsdMatrix.from_array(a).to_json() for a in ops],
        "weights": [w / norm for w in weights],
        "epsilon": p["epsilon"],
        "precision_bits": p["precision_bits"],
    }


def _run_scal(instance: Dict[str, Any]) -> Outcome:
    family = WeightedOperatorFamily(
        operators=tuple(PsdMatrix.from_json(t) for t in instance["operators"]),
        weights=tuple(instance["weights"]),
    )
    sampling = DiscretizationService.scal_sample(family, instance["epsilon"], precision_bits=instance["precision_bits"])
    return Outcome(sampling.to_json(), {}, sampling.deviation, sampling.epsilon)


# exponentials

def _gen_params(p: Dict[str, Any], rng: np.random.Generator) -> Dict[str, Any]:
    return dict(p)


def _run_exp_syndetic(instance: Dict[str, Any]) -> Outcome:
    s = IntervalUnion.from_json(instance["intervals"])
    sel = ExponentialService.syndetic_riesz_select(s, instance["epsilon"], instance["window"], instance["constant"])
    c = sel.certificates[0]
    return Outcome(sel.to_json(), {}, [c.lambda_min, c.lambda_max], [c.target_lo, c.target_hi])


def _run_exp_removal(instance: Dict[str, Any]) -> Outcome:
    sets = [IntervalUnion.from_json(s) for s in instance["sets"]]
    sel = ExponentialService.unit_norm_removal(sets, instance["window"], r=instance["r"], c_hat=instance["c_hat"])
    return Outcome(
        sel.to_json(), {}, [c.lambda_min for c in sel.certificates], [c.target_lo for c in sel.certificates]
    )


def _run_exp_frame(instance: Dict[str, Any]) -> Outcome:
    s = IntervalUnion.from_json(instance["intervals"])
    sel = ExponentialService.bounded_frame_sample(
        s, instance["epsilon"], instance["window"], r=instance["r"], c_hat=instance["c_hat"]
    )
    c = sel.certificates[0]
    return Outcome(sel.to_json(), {}, [c.lambda_min, c.lambda_max], [c.target_lo, c.target_hi])


Generator = Callable[[Dict[str, Any], np.random.Generator], Dict[str, Any]]
Runner = Callable[[Dict[str, Any]], Outcome]

_COMMANDS: Dict[Command, Tuple[Generator, Runner]] = {
    Command.MCP_EVAL: (_gen_mcp_eval, _run_mcp_eval),
    Command.MCP_MAXROOT: (_gen_mcp_maxroot, _run_mcp_maxroot),
    Command.VERIFY_IDENTITIES: (_gen_identities, _run_identities),
    Command.SELECT_WEAVER: (_gen_weaver, _run_weaver),
    Command.SELECT_KS2: (_gen_ks2, _run_ks2),
    Command.SELECT_BLOCK: (_gen_block, _run_block),
    Command.FEICHTINGER: (_gen_feichtinger, _run_feichtinger),
    Command.R_EPS: (_gen_r_eps, _run_r_eps),
    Command.BINARY_TREE: (_gen_binary_tree, _run_binary_tree),
    Command.METRIC_SEPARATE: (_gen_metric, _run_metric),
    Command.SCAL_SAMPLE: (_gen_scal, _run_scal),
    Command.EXP_SYNDETIC: (_gen_params, _run_exp_syndetic),
    Command.EXP_REMOVAL: (_gen_params, _run_exp_removal),
    Command.EXP_FRAME: (_gen_params, _run_exp_frame),
}


class ExperimentService:
    """Service for experiment instance generation and evaluation"""

    @staticmethod
    def commands() -> List[str]:
        return [c.value for c in _COMMANDS]

    @staticmethod
    def _entry(command: Any) -> Tuple[Generator, Runner]:
        try:
            return _COMMANDS[Command(command)]
        except (KeyError, ValueError):
            raise ConfigError(f"No experiment runner for command {command!r}", command=str(command))

    @staticmethod
    def generate(command: Any, params: Dict[str, Any], seed: int) -> Dict[str, Any]:
        """Instance JSON for a command; the seed alone determines any random content"""
        gen, _ = ExperimentService._entry(command)
        rng = np.random.default_rng(seed)
        instance = gen(params, rng)
        logger.info("Generated %s instance from seed %d", Command(command).value, seed)
        return instance

    @staticmethod
    def evaluate(command: Any, instance: Dict[str, Any]) -> Outcome:
        """Run the command's construction on an embedded instance"""
        _, run = ExperimentService._entry(command)
        return run(instance)


generate = ExperimentService.generate
evaluate = ExperimentService.evaluate
