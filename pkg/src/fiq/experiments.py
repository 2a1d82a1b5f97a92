"""Canned, reproducible experiments with exact-enumeration oracles.

Three studies:

* units critique -- scaling an independent-bit quantity by a constant
  couples its output digits unless the constant is a power of two or the
  bits were fair to begin with.  The exact weighted enumeration of all
  truncated prefixes sits beside the Monte Carlo run as the oracle.
* majority study -- the majority-vote construction has fair marginals,
  correlated adjacent bits matching the window enumeration, and a finite
  generating-bit count at every depth.
* units on majority -- scaling a sampled majority-vote quantity emits only
  sound digits, with the candidate information measures reported before and
  after.

Every claim in a verdict carries an exact oracle value or an explicit
statistical bound, and an identical spec (seed included) reproduces the
identical verdict.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .arithmetic import (
    DeterminedDigits,
    digits_of_rational,
    prefix_values,
    scale_fiq_truncated,
    scaled_digit_table,
)
from .estimators import (
    correlated_info_content,
    joint_is_independent,
    mi_from_joint,
    mi_noise_floor,
)
from .models import (
    FiqModel,
    IndependentBitsModel,
    MajorityVoteModel,
    exact_window_joint,
    generating_bits_count,
    model_from_json,
    model_to_json,
    sample_matrix,
)
from .propensity import HALF, PropensityVector
from .randombits import RandomBitSource
from .rational import format_rational, parse_rational

DIGIT_PAIR_POSITIONS = (1, 2, 3, 4)


@dataclass(frozen=True)
class ExperimentSpec:
    """Fully serializable description of one experiment run."""

    name: str
    model: FiqModel
    depth: int
    samples: int
    seed: int
    constant: Fraction | None = None
    sigma: float = 3.0
    threads: int = 1

    def resolved_model(self) -> FiqModel:
        """The model with the spec seed installed in its bit source."""
        source = replace(self.model.source, seed=self.seed)
        return replace(self.model, source=source)

    def to_json(self) -> dict:
        doc = {
            "name": self.name,
            "model": model_to_json(self.model),
            "depth": self.depth,
            "samples": self.samples,
            "seed": self.seed,
            "sigma": self.sigma,
        }
        if self.constant is not None:
            doc["constant"] = format_rational(self.constant)
        return doc

    @classmethod
    def from_json(cls, data: Mapping, seed: int | None = None) -> "ExperimentSpec":
        use_seed = seed if seed is not None else data.get("seed")
        if use_seed is None:
            raise ValueError("experiment spec carries no seed and none was supplied")
        constant = data.get("constant")
        return cls(
            name=data["name"],
            model=model_from_json(data["model"], seed=int(use_seed)),
            depth=int(data["depth"]),
            samples=int(data["samples"]),
            seed=int(use_seed),
            constant=None if constant is None else parse_rational(str(constant)),
            sigma=float(data.get("sigma", 3.0)),
        )


@dataclass(frozen=True)
class Claim:
    statement: str
    passed: bool
    exact_value: float | None = None
    estimate: float | None = None
    threshold: float | None = None

    def to_jsonable(self) -> dict:
        return {
            "statement": self.statement,
            "exact_value": self.exact_value,
            "estimate": self.estimate,
            "threshold": self.threshold,
            "pass": self.passed,
        }


@dataclass
class ExperimentVerdict:
    name: str
    config: dict
    claims: list[Claim]
    tables: dict[str, list[dict]] = field(default_factory=dict)
    artifacts: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.claims)

    def to_jsonable(self) -> dict:
        return {
            "experiment": self.name,
            "config": self.config,
            "claims": [c.to_jsonable() for c in self.claims],
            "pass": self.passed,
            "artifacts": self.artifacts,
        }


def _is_power_of_two(c: Fraction) -> bool:
    n, d = c.numerator, c.denominator
    return n & (n - 1) == 0 and d & (d - 1) == 0


def digit_pair_joints_exact(
    dist: Mapping[DeterminedDigits, Fraction],
    positions: Sequence[int] = DIGIT_PAIR_POSITIONS,
) -> dict[tuple[int, int], dict[tuple[int, int], Fraction]]:
    """Unconditional joint weight of each designated digit pair.

    A realization contributes to pair (i, j) only when its integer part and
    fractional digits up to j are determined; undetermined realizations are
    excluded, so each pair joint may sum to less than one.
    """
    joints: dict[tuple[int, int], dict[tuple[int, int], Fraction]] = {}
    for i, j in itertools.combinations(positions, 2):
        joint: dict[tuple[int, int], Fraction] = {}
        for dd, w in dist.items():
            if dd.integer_part is None or len(dd.fraction_bits) < j:
                continue
            key = (dd.fraction_bits[i - 1], dd.fraction_bits[j - 1])
            joint[key] = joint.get(key, Fraction(0)) + w
        joints[(i, j)] = joint
    return joints


def _digit_pair_counts(
    table: list[DeterminedDigits],
    counts_v: np.ndarray,
    positions: Sequence[int] = DIGIT_PAIR_POSITIONS,
) -> dict[tuple[int, int], dict[tuple[int, int], int]]:
    joints: dict[tuple[int, int], dict[tuple[int, int], int]] = {
        pair: {} for pair in itertools.combinations(positions, 2)
    }
    for v, c in enumerate(counts_v):
        c = int(c)
        if c == 0:
            continue
        dd = table[v]
        if dd.integer_part is None:
            continue
        for (i, j), joint in joints.items():
            if len(dd.fraction_bits) < j:
                continue
            key = (dd.fraction_bits[i - 1], dd.fraction_bits[j - 1])
            joint[key] = joint.get(key, 0) + c
    return joints


def _cell_agreement_z(
    exact_joint: Mapping[tuple[int, int], Fraction],
    count_joint: Mapping[tuple[int, int], int],
    n_total: int,
) -> tuple[float, bool]:
    """Largest binomial z-score across cells; exact-zero cells must be empty."""
    worst = 0.0
    ok = True
    cells = {(a, b) for a in (0, 1) for b in (0, 1)}
    for cell in cells:
        p = float(exact_joint.get(cell, Fraction(0)))
        f = count_joint.get(cell, 0) / n_total
        if p == 0.0 or p == 1.0:
            if f != p:
                ok = False
            continue
        worst = max(worst, abs(f - p) / math.sqrt(p * (1.0 - p) / n_total))
    return worst, ok


def run_units_critique(spec: ExperimentSpec) -> ExperimentVerdict:
    """Change-of-units study on an independent-bit model.

    With at least one biased prefix bit and a constant that is not a power
    of two, exact enumeration must show correlated output digits; otherwise
    the run is a control and every designated pair must be exactly
    independent.  Monte Carlo must agree with the exact joint cell by cell.
    """
    model = spec.resolved_model()
    if not isinstance(model, IndependentBitsModel):
        raise ValueError("units critique requires an independent-bit model")
    if spec.constant is None or spec.constant <= 0:
        raise ValueError("units critique requires a positive rational constant")
    c = spec.constant
    biased = any(q != HALF for q in model.pv.prefix)
    expect_correlation = biased and not _is_power_of_two(c)

    dist = scale_fiq_truncated(model, c, spec.depth)
    exact_joints = digit_pair_joints_exact(dist)
    exact_mi = {pair: mi_from_joint(j) if j else 0.0 for pair, j in exact_joints.items()}
    exact_indep = {pair: (not j) or joint_is_independent(j) for pair, j in exact_joints.items()}

    claims: list[Claim] = []
    if expect_correlation:
        claims.append(Claim(
            statement="exact enumeration: at least one designated digit pair is correlated",
            passed=not all(exact_indep.values()),
            exact_value=max(exact_mi.values()),
            threshold=0.0,
        ))
    else:
        claims.append(Claim(
            statement="exact enumeration: all designated digit pairs are independent (control)",
            passed=all(exact_indep.values()),
            exact_value=max(exact_mi.values()),
            threshold=0.0,
        ))

    sample = sample_matrix(model, spec.depth, spec.samples, threads=spec.threads)
    table = scaled_digit_table(c, spec.depth)
    counts_v = np.bincount(prefix_values(sample), minlength=1 << spec.depth)
    count_joints = _digit_pair_counts(table, counts_v)

    worst_z = 0.0
    cells_ok = True
    for pair, exact_joint in exact_joints.items():
        z, ok = _cell_agreement_z(exact_joint, count_joints[pair], spec.samples)
        worst_z = max(worst_z, z)
        cells_ok = cells_ok and ok
    claims.append(Claim(
        statement="Monte Carlo digit-pair cells agree with the exact joint",
        passed=cells_ok and worst_z <= spec.sigma,
        estimate=worst_z,
        threshold=spec.sigma,
    ))

    floor = mi_noise_floor(spec.samples)
    emp_mi = {}
    for pair, joint in count_joints.items():
        n_incl = sum(joint.values())
        emp_mi[pair] = mi_from_joint(joint) if n_incl and len(joint) > 1 else 0.0
    if expect_correlation:
        target = max(exact_mi, key=lambda p: exact_mi[p])
        claims.append(Claim(
            statement=f"empirical MI of pair {target} exceeds the noise floor",
            passed=emp_mi[target] > floor,
            exact_value=exact_mi[target],
            estimate=emp_mi[target],
            threshold=floor,
        ))
    else:
        claims.append(Claim(
            statement="empirical thresholded MI is zero for every designated pair (control)",
            passed=all(v <= floor for v in emp_mi.values()),
            estimate=max(emp_mi.values()),
            threshold=floor,
        ))

    tables = {
        "digit_pair_mi": [
            {
                "pair": f"{i}-{j}",
                "exact_mi_bits": exact_mi[(i, j)],
                "empirical_mi_bits": emp_mi[(i, j)],
                "exact_independent": exact_indep[(i, j)],
            }
            for (i, j) in exact_joints
        ],
    }
    return ExperimentVerdict(name=spec.name, config=spec.to_json(), claims=claims, tables=tables)


class _RecordingSource(RandomBitSource):
    """Bit source that records every (first, count) uniform request."""

    def __post_init__(self) -> None:
        super().__post_init__()
        object.__setattr__(self, "requests", [])

    def uniforms(self, stream_ids, first, count):
        self.requests.append((first, count))
        return super().uniforms(stream_ids, first, count)


def consumed_source_indices(model: FiqModel, depth: int) -> set[int]:
    """Source bit indices actually requested when sampling to ``depth``."""
    recorder = _RecordingSource(
        seed=model.source.seed, bias=model.source.bias, stream_id=model.source.stream_id
    )
    instrumented = replace(model, source=recorder)
    from .models import sample_prefix

    sample_prefix(instrumented, depth)
    consumed: set[int] = set()
    for first, count in recorder.requests:
        consumed.update(range(first, first + count))
    return consumed


def run_majority_study(spec: ExperimentSpec) -> ExperimentVerdict:
    """Marginals, adjacent-bit correlation and finiteness of the majority model."""
    model = spec.resolved_model()
    if not isinstance(model, MajorityVoteModel):
        raise ValueError("majority study requires a majority-vote model")
    k = model.k
    bias = model.source.bias
    sample = sample_matrix(model, spec.depth, spec.samples, threads=spec.threads)
    n = spec.samples
    claims: list[Claim] = []

    # (i) every marginal matches the exact window probability
    p1 = float(exact_window_joint(k, bias, [1])[(1,)])
    freqs = sample.bits.mean(axis=0)
    z_marg = max(abs(float(f) - p1) / math.sqrt(p1 * (1 - p1) / n) for f in freqs)
    claims.append(Claim(
        statement="every bit marginal matches the exact window probability",
        passed=z_marg <= spec.sigma,
        exact_value=p1,
        estimate=z_marg,
        threshold=spec.sigma,
    ))

    # (ii) adjacent-bit joint matches the exact enumeration
    adj_exact = exact_window_joint(k, bias, [1, 2])
    adj_mi_exact = mi_from_joint(adj_exact)
    adj_counts = {}
    codes = sample.bits[:, 0].astype(np.int64) * 2 + sample.bits[:, 1]
    binc = np.bincount(codes, minlength=4)
    for a in (0, 1):
        for b in (0, 1):
            adj_counts[(a, b)] = int(binc[2 * a + b])
    z_adj, cells_ok = _cell_agreement_z(adj_exact, adj_counts, n)
    adj_mi_emp = mi_from_joint(adj_counts)
    floor = mi_noise_floor(n)
    if k == 1:
        passed = joint_is_independent(adj_exact) and adj_mi_emp <= floor
        statement = "k=1 degenerates to i.i.d.: adjacent bits independent"
    else:
        passed = cells_ok and z_adj <= spec.sigma and adj_mi_emp > floor
        statement = "adjacent-bit joint matches the exact enumeration (correlated)"
    claims.append(Claim(
        statement=statement,
        passed=passed,
        exact_value=adj_mi_exact,
        estimate=adj_mi_emp,
        threshold=spec.sigma,
    ))

    # (iii) bits at distance >= k are exactly and empirically independent
    if spec.depth > k + 1:
        far_exact = exact_window_joint(k, bias, [1, 1 + k])
        far_codes = sample.bits[:, 0].astype(np.int64) * 2 + sample.bits[:, k]
        far_binc = np.bincount(far_codes, minlength=4)
        far_counts = {(a, b): int(far_binc[2 * a + b]) for a in (0, 1) for b in (0, 1)}
        far_mi = mi_from_joint(far_counts)
        claims.append(Claim(
            statement=f"bits at distance {k} are independent (disjoint windows)",
            passed=joint_is_independent(far_exact) and far_mi <= floor,
            exact_value=0.0,
            estimate=far_mi,
            threshold=floor,
        ))

    # (iv) finite generating-bit count at every depth, against instrumentation
    count_ok = True
    for d in range(1, spec.depth + 1):
        expected = d + k - 1
        if generating_bits_count(model, d) != expected:
            count_ok = False
        consumed = consumed_source_indices(model, d)
        if consumed != set(range(1, expected + 1)):
            count_ok = False
    claims.append(Claim(
        statement="generating-bit count is d+k-1 and matches consumed source indices",
        passed=count_ok,
        exact_value=float(spec.depth + k - 1),
        estimate=float(spec.depth + k - 1) if count_ok else -1.0,
        threshold=0.0,
    ))

    tables = {
        "marginals": [
            {"position": i + 1, "frequency": float(f), "exact": p1}
            for i, f in enumerate(freqs)
        ],
        "adjacent_joint": [
            {"cell": f"{a}{b}", "exact": float(adj_exact[(a, b)]), "count": adj_counts[(a, b)]}
            for a in (0, 1) for b in (0, 1)
        ],
    }
    return ExperimentVerdict(name=spec.name, config=spec.to_json(), claims=claims, tables=tables)


def run_units_on_majority(spec: ExperimentSpec) -> ExperimentVerdict:
    """Scale sampled majority-vote quantities and audit every emitted digit.

    Soundness oracle: for each realized prefix, the determined digits of the
    scaled interval are recomputed from exact rational points inside the
    interval; any disagreement fails the run.  Candidate information
    measures are reported for the input bits and the output digits.
    """
    model = spec.resolved_model()
    if not isinstance(model, MajorityVoteModel):
        raise ValueError("this study requires a majority-vote model")
    if spec.constant is None or spec.constant <= 0:
        raise ValueError("a positive rational constant is required")
    c = spec.constant
    sample = sample_matrix(model, spec.depth, spec.samples, threads=spec.threads)
    table = scaled_digit_table(c, spec.depth)
    values = prefix_values(sample)
    counts_v = np.bincount(values, minlength=1 << spec.depth)

    # soundness check on every realized prefix value
    step = Fraction(1, 1 << spec.depth)
    sound = True
    for v in np.nonzero(counts_v)[0]:
        dd = table[int(v)]
        low = int(v) * step
        for point in (c * low, c * (low + step / 3), c * (low + step - step / 1000)):
            int_part, frac = digits_of_rational(point, len(dd.fraction_bits))
            if dd.integer_part is not None and (int_part != dd.integer_part or frac != dd.fraction_bits):
                sound = False
    claims = [Claim(
        statement="every emitted digit agrees with exact arithmetic on interior points",
        passed=sound,
        exact_value=0.0,
        estimate=0.0 if sound else 1.0,
        threshold=0.0,
    )]

    # correlation structure and candidate measures before/after scaling
    d_in = min(spec.depth, 8)
    before = correlated_info_content(sample, d_in)
    count_joints = _digit_pair_counts(table, counts_v)
    floor = mi_noise_floor(spec.samples)
    out_mi = {
        pair: (mi_from_joint(j) if sum(j.values()) and len(j) > 1 else 0.0)
        for pair, j in count_joints.items()
    }
    tables = {
        "candidate_measures": [
            {"stage": "input", **before.to_jsonable()},
        ],
        "output_digit_mi": [
            {"pair": f"{i}-{j}", "empirical_mi_bits": out_mi[(i, j)], "noise_floor": floor}
            for (i, j) in out_mi
        ],
    }
    # output-digit marginal measure over the designated positions
    out_counts: dict[tuple[int, ...], int] = {}
    for v, cnt in enumerate(counts_v):
        cnt = int(cnt)
        if cnt == 0:
            continue
        dd = table[v]
        if dd.integer_part is None or len(dd.fraction_bits) < 4:
            continue
        key = dd.fraction_bits[:4]
        out_counts[key] = out_counts.get(key, 0) + cnt
    if out_counts:
        from .estimators import correlated_info_from_dist

        after = correlated_info_from_dist(out_counts)
        tables["candidate_measures"].append({"stage": "output", **after.to_jsonable()})

    claims.append(Claim(
        statement="correlation and candidate-measure reports emitted",
        passed=bool(tables["candidate_measures"]),
        estimate=float(len(tables["candidate_measures"])),
        threshold=1.0,
    ))
    return ExperimentVerdict(name=spec.name, config=spec.to_json(), claims=claims, tables=tables)


# ---------------------------------------------------------------------------
# presets

YARDS_TO_METERS = Fraction(1143, 1250)


def _independent(prefix, seed: int) -> IndependentBitsModel:
    return IndependentBitsModel(
        pv=PropensityVector.of(prefix), source=RandomBitSource(seed=seed)
    )


def _majority(k: int, seed: int) -> MajorityVoteModel:
    return MajorityVoteModel(k=k, source=RandomBitSource(seed=seed))


def preset_spec(kind: str, name: str, seed: int, threads: int = 1) -> ExperimentSpec:
    """Build a named preset; the seed is always supplied by the caller."""
    f34 = Fraction(3, 4)
    units = {
        "biased-x3": (["3/4", "3/4"], Fraction(3)),
        # three biased bits: with only two, 10*Q = 5*b1 + (2+1/2)*b2 + uniform
        # noise, which leaves the output digits exactly pairwise independent
        "biased-x10": (["3/4", "3/4", "3/4"], Fraction(10)),
        "biased-yards-to-meters": (["3/4", "3/4"], YARDS_TO_METERS),
        "uniform-x3-control": ([], Fraction(3)),
        "biased-half-shift-control": (["3/4"], Fraction(1, 2)),
    }
    majority = {"k1-control": 1, "k3": 3, "k5": 5}
    units_majority = {
        "k3-x3": (3, Fraction(3)),
        "k3-x1-identity": (3, Fraction(1)),
        "k3-x2-shift": (3, Fraction(2)),
    }
    if kind == "units":
        if name not in units:
            raise ValueError(f"unknown units preset {name!r}; choose from {sorted(units)}")
        prefix, c = units[name]
        return ExperimentSpec(
            name=f"units:{name}", model=_independent(prefix, seed), depth=12,
            samples=100_000, seed=seed, constant=c, threads=threads,
        )
    if kind == "majority":
        if name not in majority:
            raise ValueError(f"unknown majority preset {name!r}; choose from {sorted(majority)}")
        return ExperimentSpec(
            name=f"majority:{name}", model=_majority(majority[name], seed), depth=16,
            samples=100_000, seed=seed, threads=threads,
        )
    if kind == "units-majority":
        if name not in units_majority:
            raise ValueError(
                f"unknown units-majority preset {name!r}; choose from {sorted(units_majority)}"
            )
        k, c = units_majority[name]
        return ExperimentSpec(
            name=f"units-majority:{name}", model=_majority(k, seed), depth=12,
            samples=10_000, seed=seed, constant=c, threads=threads,
        )
    raise ValueError(f"unknown experiment kind {kind!r}")


RUNNERS = {
    "units": run_units_critique,
    "majority": run_majority_study,
    "units-majority": run_units_on_majority,
}
