"""Coherent-system structures and lifetime moments.

A coherent system with lifetime T = max over path sets of the min component
lifetime inside the path set admits the signed expansion

    P(T > m) = sum_K alpha_K P(min over K > m)

with integer coefficients alpha_K produced by inclusion-exclusion over
collections of minimal path sets; the dual expansion over minimal cut sets
gives beta_K against maxima.  Moments follow by the usual survival series,
exactly on finite supports, truncated with a certified error bound otherwise,
and in closed form for multivariate geometric components.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from types import MappingProxyType
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .distributions import (
    ExplicitFinitePMF,
    Geometric,
    IndependentMarginals,
    JointModel,
    MvgModel,
    NegBin,
    Poisson,
    rect_prob,
)
from .errors import (
    CapacityError,
    NumericError,
    UnsupportedModelError,
    ValidationError,
)
from .mvg import MvgParams, geometric_factorial_moment, mvg_min_param
from .orderstats import (
    MomentResult,
    TruncationPlan,
    _weights,
    generic_truncation_index,
    negbin_truncation_index,
    poisson_truncation_index,
)

__all__ = [
    "SystemStructure",
    "SignatureSet",
    "alpha_coefficients",
    "beta_coefficients",
    "minimal_signature",
    "maximal_signature",
    "signature_from_samaniego",
    "signature_set",
    "k_out_of_n_structure",
    "cut_sets_from_path_sets",
    "system_survival",
    "system_moment_exact",
    "system_moment_approx",
    "system_moment_approx_beta",
    "system_moment_mvg",
    "system_mean_var_mvg",
    "system_moment_from_min_moments",
    "system_moment_from_max_moments",
    "exchangeable_system_moment",
]

COLLECTION_CAP = 25  # 2^s collections of path/cut sets; beyond this is refused

TRANSVERSAL_N_CAP = 20  # cut-set derivation scans 2^n subsets


def _normalize_family(sets: Iterable[Iterable[int]], n: int, label: str) -> tuple[frozenset[int], ...]:
    fam = []
    for S in sets:
        fs = frozenset(int(i) for i in S)
        if not fs:
            raise ValidationError(f"empty {label} set")
        if not all(1 <= i <= n for i in fs):
            raise ValidationError(f"{label} set {sorted(fs)} outside 1..{n}")
        fam.append(fs)
    if not fam:
        raise ValidationError(f"{label} sets list is empty")
    if len(set(fam)) != len(fam):
        raise ValidationError(f"duplicate {label} sets")
    for A, B in combinations(fam, 2):
        if A <= B or B <= A:
            raise ValidationError(
                f"{label} sets {sorted(A)} and {sorted(B)} are nested; "
                "minimal sets form an antichain"
            )
    covered = frozenset().union(*fam)
    if len(covered) != n:
        missing = sorted(set(range(1, n + 1)) - covered)
        raise ValidationError(f"components {missing} appear in no {label} set")
    return tuple(sorted(fam, key=lambda S: (len(S), sorted(S))))


class SystemStructure:
    """Component count n plus minimal path sets and/or minimal cut sets.

    Both families are declarations: nested sets are rejected rather than
    minimized, and every component must appear in at least one set of each
    family supplied (irrelevant components have no place in a coherent
    system).
    """

    __slots__ = ("n", "path_sets", "cut_sets")

    def __init__(
        self,
        n: int,
        path_sets: Iterable[Iterable[int]] | None = None,
        cut_sets: Iterable[Iterable[int]] | None = None,
    ):
        n = int(n)
        if n < 1:
            raise ValidationError(f"n={n} must be >= 1")
        if path_sets is None and cut_sets is None:
            raise ValidationError("need path sets, cut sets, or both")
        self.n = n
        self.path_sets = None if path_sets is None else _normalize_family(path_sets, n, "path")
        self.cut_sets = None if cut_sets is None else _normalize_family(cut_sets, n, "cut")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SystemStructure)
            and (self.n, self.path_sets, self.cut_sets) == (other.n, other.path_sets, other.cut_sets)
        )

    def __hash__(self) -> int:
        return hash((self.n, self.path_sets, self.cut_sets))

    def __repr__(self) -> str:
        parts = [f"n={self.n}"]
        if self.path_sets is not None:
            parts.append(f"path_sets={[sorted(S) for S in self.path_sets]}")
        if self.cut_sets is not None:
            parts.append(f"cut_sets={[sorted(S) for S in self.cut_sets]}")
        return f"SystemStructure({', '.join(parts)})"


def k_out_of_n_structure(n: int, k: int, kind: str = "G") -> SystemStructure:
    """k-out-of-n:G works iff >= k components work; :F fails iff >= k fail.

    T equals the order statistic X_{n-k+1:n} for :G and X_{k:n} for :F.
    """
    if not 1 <= k <= n:
        raise ValidationError(f"k={k} outside 1..{n}")
    if kind == "G":
        path_size, cut_size = k, n - k + 1
    elif kind == "F":
        path_size, cut_size = n - k + 1, k
    else:
        raise ValidationError(f"kind must be 'G' or 'F', not {kind!r}")
    idx = range(1, n + 1)
    return SystemStructure(
        n,
        path_sets=combinations(idx, path_size),
        cut_sets=combinations(idx, cut_size),
    )


def _mask(S: frozenset[int]) -> int:
    m = 0
    for i in S:
        m |= 1 << (i - 1)
    return m


def _unmask(mask: int) -> frozenset[int]:
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return frozenset(out)


def _collection_coefficients(family: Sequence[frozenset[int]]) -> dict[frozenset[int], int]:
    """Inclusion-exclusion weights: coeff[U] = sum over non-empty collections
    with union U of (-1)^(collection size + 1).  Exact integer arithmetic."""
    s = len(family)
    if s > COLLECTION_CAP:
        raise CapacityError(f"{s} sets means 2^{s} collections; cap is {COLLECTION_CAP}")
    masks = [_mask(S) for S in family]
    size = 1 << s
    unions = np.zeros(size, dtype=np.int64)
    parity = np.zeros(size, dtype=bool)
    for j, u in enumerate(masks):
        b = 1 << j
        unions[b : 2 * b] = unions[:b] | u
        parity[b : 2 * b] = ~parity[:b]
    minlength = int(unions.max()) + 1
    odd = np.bincount(unions[parity], minlength=minlength)
    even_sel = ~parity
    even_sel[0] = False  # the empty collection contributes nothing
    even = np.bincount(unions[even_sel], minlength=minlength)
    coeff = odd - even
    return {_unmask(int(u)): int(coeff[u]) for u in np.nonzero(coeff)[0]}


def alpha_coefficients(structure: SystemStructure) -> dict[frozenset[int], int]:
    """Subset weights of the survival expansion over minima of path-set unions."""
    if structure.path_sets is None:
        raise ValidationError("structure has no path sets")
    return _collection_coefficients(structure.path_sets)


def beta_coefficients(structure: SystemStructure) -> dict[frozenset[int], int]:
    """Subset weights of the failure expansion over maxima of cut-set unions."""
    if structure.cut_sets is None:
        raise ValidationError("structure has no cut sets")
    return _collection_coefficients(structure.cut_sets)


def _aggregate_by_size(coeffs: Mapping[frozenset[int], int], n: int) -> tuple[int, ...]:
    vec = [0] * n
    for K, c in coeffs.items():
        vec[len(K) - 1] += c
    return tuple(vec)


def minimal_signature(structure: SystemStructure) -> tuple[int, ...]:
    """(alpha_1..alpha_n): survival as a signed mixture of minima of i components."""
    return _aggregate_by_size(alpha_coefficients(structure), structure.n)


def maximal_signature(structure: SystemStructure) -> tuple[int, ...]:
    """(beta_1..beta_n): failure as a signed mixture of maxima of i components."""
    return _aggregate_by_size(beta_coefficients(structure), structure.n)


def signature_from_samaniego(s: Sequence, n: int) -> tuple:
    """Minimal signature from a Samaniego signature (s_1..s_n).

    s_r is the probability that the system fails at the r-th component
    failure (exchangeable lifetimes).  The conversion is

        alpha_i = C(n,i) sum_{r=n-i+1}^{n} s_r (-1)^(r-1-n+i) C(i-1, n-r)

    computed in exact rational arithmetic; float inputs are snapped to the
    nearest fraction with denominator <= 10^12 first.  The formula itself
    uses only the structure, but it agrees with the path-set signature only
    under exchangeability.
    """
    if len(s) != n:
        raise ValidationError(f"signature has length {len(s)}, expected n={n}")
    vals = []
    for x in s:
        if isinstance(x, float):
            vals.append(Fraction(x).limit_denominator(10**12))
        else:
            vals.append(Fraction(x))
    if any(v < 0 or v > 1 for v in vals):
        raise ValidationError("signature entries must lie in [0, 1]")
    if sum(vals) != 1:
        raise ValidationError(f"signature sums to {float(sum(vals))}, not 1")
    alpha = []
    for i in range(1, n + 1):
        acc = Fraction(0)
        for r in range(n - i + 1, n + 1):
            acc += vals[r - 1] * (-1) ** (r - 1 - n + i) * math.comb(i - 1, n - r)
        alpha.append(math.comb(n, i) * acc)
    if all(a.denominator == 1 for a in alpha):
        return tuple(int(a) for a in alpha)
    return tuple(alpha)


@dataclass(frozen=True)
class SignatureSet:
    """All signature views of one structure; beta parts are None without cut sets."""

    alpha_subsets: Mapping[frozenset[int], int] | None
    beta_subsets: Mapping[frozenset[int], int] | None
    alpha: tuple[int, ...] | None
    beta: tuple[int, ...] | None
    samaniego: tuple | None = None


def signature_set(structure: SystemStructure, samaniego: Sequence | None = None) -> SignatureSet:
    a_sub = alpha_coefficients(structure) if structure.path_sets is not None else None
    b_sub = beta_coefficients(structure) if structure.cut_sets is not None else None
    alpha = _aggregate_by_size(a_sub, structure.n) if a_sub is not None else None
    beta = _aggregate_by_size(b_sub, structure.n) if b_sub is not None else None
    for label, vec in (("alpha", alpha), ("beta", beta)):
        if vec is not None and sum(vec) != 1:
            raise NumericError(f"{label} signature sums to {sum(vec)}, not 1")
    sam = None
    if samaniego is not None:
        # run the conversion's validation, then keep the input vector
        signature_from_samaniego(samaniego, structure.n)
        sam = tuple(samaniego)
    return SignatureSet(
        alpha_subsets=MappingProxyType(a_sub) if a_sub is not None else None,
        beta_subsets=MappingProxyType(b_sub) if b_sub is not None else None,
        alpha=alpha,
        beta=beta,
        samaniego=sam,
    )


def cut_sets_from_path_sets(n: int, path_sets: Iterable[Iterable[int]]) -> tuple[frozenset[int], ...]:
    """Minimal cut sets as minimal transversals of the path sets.

    Brute force over all 2^n component subsets; fine off the hot path for
    n <= 20, refused beyond.
    """
    if n > TRANSVERSAL_N_CAP:
        raise CapacityError(f"transversal scan is 2^{n} subsets; cap is {TRANSVERSAL_N_CAP}")
    fam = _normalize_family(path_sets, n, "path")
    masks = [_mask(S) for S in fam]
    cuts = []
    for c in range(1, 1 << n):
        if not all(c & pm for pm in masks):
            continue
        rest, minimal = c, True
        while rest:
            bit = rest & -rest
            if all((c ^ bit) & pm for pm in masks):
                minimal = False
                break
            rest ^= bit
        if minimal:
            cuts.append(_unmask(c))
    return tuple(sorted(cuts, key=lambda S: (len(S), sorted(S))))


# ---------------------------------------------------------------------------
# survival and moments
# ---------------------------------------------------------------------------

def system_survival(model: JointModel, structure: SystemStructure, m: int, form: str = "auto") -> float:
    """P(T > m) by the alpha expansion, or the beta complement when asked
    (or when only cut sets are available)."""
    if model.n != structure.n:
        raise ValidationError(f"model.n={model.n} does not match structure.n={structure.n}")
    if form == "auto":
        form = "alpha" if structure.path_sets is not None else "beta"
    if m < 0:
        return 1.0
    if form == "alpha":
        coeffs = alpha_coefficients(structure)
        return float(
            math.fsum(c * rect_prob(model, (), tuple(K), m) for K, c in coeffs.items())
        )
    if form == "beta":
        coeffs = beta_coefficients(structure)
        return 1.0 - float(
            math.fsum(c * rect_prob(model, tuple(K), (), m) for K, c in coeffs.items())
        )
    raise ValidationError(f"form must be auto, alpha, or beta, not {form!r}")


def _min_survival_series(model: JointModel, K: frozenset[int], m_hi: int) -> np.ndarray:
    """P(min over K > m) for m = 0..m_hi."""
    cols = sorted(i - 1 for i in K)
    if isinstance(model, MvgModel):
        theta = mvg_min_param(model.params, K)
        return theta ** np.arange(1.0, m_hi + 2.0)
    if isinstance(model, IndependentMarginals):
        surv = 1.0 - model.cdf_matrix(m_hi)[:, cols]
        return surv.prod(axis=1)
    if isinstance(model, ExplicitFinitePMF):
        mins = model.points[:, cols].min(axis=1)
        pmf = np.bincount(mins.astype(np.intp), weights=model.probs, minlength=m_hi + 2)
        surv = np.concatenate([np.cumsum(pmf[::-1])[::-1][1:], [0.0]])
        return surv[: m_hi + 1]
    return np.array([rect_prob(model, (), tuple(K), m) for m in range(m_hi + 1)])


def _max_cdf_series(model: JointModel, K: frozenset[int], m_hi: int) -> np.ndarray:
    """P(max over K <= m) for m = 0..m_hi."""
    cols = sorted(i - 1 for i in K)
    if isinstance(model, IndependentMarginals):
        return model.cdf_matrix(m_hi)[:, cols].prod(axis=1)
    if isinstance(model, ExplicitFinitePMF):
        maxs = model.points[:, cols].max(axis=1)
        pmf = np.bincount(maxs.astype(np.intp), weights=model.probs, minlength=m_hi + 1)
        return np.cumsum(pmf)[: m_hi + 1]
    return np.array([rect_prob(model, tuple(K), (), m) for m in range(m_hi + 1)])


def _system_survival_series(
    model: JointModel, coeffs: Mapping[frozenset[int], int], m_hi: int, form: str
) -> np.ndarray:
    out = np.zeros(m_hi + 1)
    if form == "alpha":
        for K, c in coeffs.items():
            out += c * _min_survival_series(model, K, m_hi)
        return out
    for K, c in coeffs.items():
        out += c * _max_cdf_series(model, K, m_hi)
    return 1.0 - out


def system_moment_exact(model: JointModel, structure: SystemStructure, p: int) -> MomentResult:
    """E T^p on a finite-support model, summed to the end of the support."""
    if model.n != structure.n:
        raise ValidationError(f"model.n={model.n} does not match structure.n={structure.n}")
    if p < 1:
        raise ValidationError(f"moment order p={p} must be >= 1")
    m_max = model.support_max()
    if m_max is None:
        raise UnsupportedModelError(
            "model has infinite support; use system_moment_approx with an error bound"
        )
    if m_max == 0:
        return MomentResult(value=0.0, exact=True)
    if structure.path_sets is not None:
        series = _system_survival_series(model, alpha_coefficients(structure), m_max - 1, "alpha")
    else:
        series = _system_survival_series(model, beta_coefficients(structure), m_max - 1, "beta")
    return MomentResult(value=float(np.dot(_weights(p, m_max - 1), series)), exact=True)


def _positive_part_sum(coeffs: Mapping[frozenset[int], int]) -> int:
    return sum(c for c in coeffs.values() if c > 0)


def _dominant_truncation(model: JointModel, p: int, scaled_d: float) -> TruncationPlan:
    """Truncation index for the model's stochastically largest marginal.

    Poisson and negative binomial families use their closed-form planners;
    everything else searches the dominating marginal's tail moment directly.
    The caller is responsible for the premise that one marginal dominates at
    every threshold (automatic in the families below).
    """
    if isinstance(model, MvgModel):
        thetas = [mvg_min_param(model.params, (i,)) for i in range(1, model.n + 1)]
        j0 = max(range(model.n), key=lambda j: (thetas[j], -j)) + 1
        dist = Geometric(1.0 - thetas[j0 - 1])
        M0 = generic_truncation_index(lambda m: dist.tail_moment(p, m), p, scaled_d)
        return TruncationPlan(M0=M0, j0=j0, threshold=scaled_d)
    if isinstance(model, ExplicitFinitePMF):
        # finite support: the tail vanishes at the support end, error is 0
        means = model.points.T @ model.probs
        j0 = int(np.argmax(means)) + 1
        return TruncationPlan(M0=model.support_max() - 1, j0=j0, threshold=scaled_d)
    if isinstance(model, IndependentMarginals):
        margs = model.marginals
        if all(isinstance(d, Poisson) for d in margs):
            lams = [d.lam for d in margs]
            j0 = max(range(len(lams)), key=lambda j: (lams[j], -j)) + 1
            M0, q = poisson_truncation_index(lams[j0 - 1], p, scaled_d)
            return TruncationPlan(M0=M0, j0=j0, threshold=q)
        if all(isinstance(d, NegBin) for d in margs) and len({d.R for d in margs}) == 1:
            ps = [d.p for d in margs]
            j0 = min(range(len(ps)), key=lambda j: (ps[j], j)) + 1
            M0, q = negbin_truncation_index(margs[0].R, ps[j0 - 1], p, scaled_d)
            return TruncationPlan(M0=M0, j0=j0, threshold=q)
        j0 = max(range(len(margs)), key=lambda j: (margs[j].mean(), -j)) + 1
        dist = margs[j0 - 1]
        M0 = generic_truncation_index(lambda m: dist.tail_moment(p, m), p, scaled_d)
        return TruncationPlan(M0=M0, j0=j0, threshold=scaled_d)
    raise UnsupportedModelError(f"no truncation planner for {type(model).__name__}")


def system_moment_approx(
    model: JointModel,
    structure: SystemStructure,
    p: int,
    d: float,
    plan: TruncationPlan | None = None,
) -> MomentResult:
    """Truncated E T^p via the alpha expansion; error lies in [0, d].

    The truncation index satisfies the tail condition scaled by the sum of
    positive alpha coefficients, so the dropped terms cannot exceed d.
    """
    if model.n != structure.n:
        raise ValidationError(f"model.n={model.n} does not match structure.n={structure.n}")
    if p < 1:
        raise ValidationError(f"moment order p={p} must be >= 1")
    if not d > 0.0:
        raise ValidationError(f"error bound d={d} must be positive")
    coeffs = alpha_coefficients(structure)
    if plan is None:
        plan = _dominant_truncation(model, p, d / _positive_part_sum(coeffs))
    if plan.M0 == -1:
        return MomentResult(value=0.0, exact=False, M0_used=-1, error_bound=d)
    series = _system_survival_series(model, coeffs, plan.M0, "alpha")
    value = float(np.dot(_weights(p, plan.M0), series))
    return MomentResult(value=value, exact=False, M0_used=plan.M0, error_bound=d)


def system_moment_approx_beta(
    model: JointModel,
    structure: SystemStructure,
    p: int,
    d: float,
    plan: TruncationPlan | None = None,
) -> MomentResult:
    """Truncated E T^p via the beta (cut-set) expansion.

    The complement form needs the tail condition scaled by both the positive
    beta coefficients and 2^n - 1, so its truncation index is typically
    larger than the alpha form's.
    """
    if model.n != structure.n:
        raise ValidationError(f"model.n={model.n} does not match structure.n={structure.n}")
    if p < 1:
        raise ValidationError(f"moment order p={p} must be >= 1")
    if not d > 0.0:
        raise ValidationError(f"error bound d={d} must be positive")
    coeffs = beta_coefficients(structure)
    if plan is None:
        scaled = d / ((2**model.n - 1) * _positive_part_sum(coeffs))
        plan = _dominant_truncation(model, p, scaled)
    if plan.M0 == -1:
        return MomentResult(value=0.0, exact=False, M0_used=-1, error_bound=d)
    series = _system_survival_series(model, coeffs, plan.M0, "beta")
    value = float(np.dot(_weights(p, plan.M0), series))
    return MomentResult(value=value, exact=False, M0_used=plan.M0, error_bound=d)


def system_moment_mvg(params: MvgParams, structure: SystemStructure, p: int) -> float:
    """Closed-form factorial moment E(T)_p for multivariate geometric components.

    Each subset minimum is geometric with parameter theta(K), so the alpha
    expansion turns into a finite signed sum of geometric factorial moments.
    Exchangeable parameters need only the minimal signature: theta(K) depends
    on K through its size alone.
    """
    if params.n != structure.n:
        raise ValidationError(f"params.n={params.n} does not match structure.n={structure.n}")
    if p < 1:
        raise ValidationError(f"moment order p={p} must be >= 1")
    if params.exchangeable:
        alpha = minimal_signature(structure)
        terms = []
        for i, a in enumerate(alpha, start=1):
            if a == 0:
                continue
            theta = mvg_min_param(params, range(1, i + 1))
            if theta >= 1.0:
                raise ValidationError(f"defective minimum over {i} components: theta={theta}")
            terms.append(a * geometric_factorial_moment(theta, p))
        return float(math.fsum(terms))
    terms = []
    for K, c in alpha_coefficients(structure).items():
        theta = mvg_min_param(params, K)
        if theta >= 1.0:
            raise ValidationError(f"defective minimum over {sorted(K)}: theta={theta}")
        terms.append(c * geometric_factorial_moment(theta, p))
    return float(math.fsum(terms))


def system_mean_var_mvg(params: MvgParams, structure: SystemStructure) -> tuple[float, float]:
    """(ET, Var T) from the first two closed-form factorial moments."""
    m1 = system_moment_mvg(params, structure, 1)
    m2 = system_moment_mvg(params, structure, 2)
    return m1, m2 + m1 * (1.0 - m1)


def system_moment_from_min_moments(
    provider: Callable[[frozenset[int], int], float],
    structure: SystemStructure,
    p: int,
) -> float:
    """alpha-weighted combination of caller-supplied subset-minimum moments.

    ``provider(K, p)`` must return E(X_{1:K}^p) (or the factorial variant;
    the output is then in the same convention).  Finiteness is required for
    every K with a non-zero coefficient.
    """
    terms = []
    for K, c in alpha_coefficients(structure).items():
        v = provider(K, p)
        if math.isinf(v) or math.isnan(v):
            raise NumericError(f"minimum moment over {sorted(K)} is not finite: {v}")
        terms.append(c * v)
    return float(math.fsum(terms))


def system_moment_from_max_moments(
    provider: Callable[[frozenset[int], int], float],
    structure: SystemStructure,
    p: int,
) -> float:
    """beta-weighted combination of subset-maximum moments, dual to the above."""
    terms = []
    for K, c in beta_coefficients(structure).items():
        v = provider(K, p)
        if math.isinf(v) or math.isnan(v):
            raise NumericError(f"maximum moment over {sorted(K)} is not finite: {v}")
        terms.append(c * v)
    return float(math.fsum(terms))


def exchangeable_system_moment(
    model: JointModel,
    signature: Sequence[float],
    p: int,
    d: float | None = None,
    form: str = "alpha",
) -> MomentResult:
    """E T^p for exchangeable components from a minimal or maximal signature.

    Under exchangeability the subset expansion collapses onto prefixes: only
    P(X_1 > m, ..., X_i > m) for i = 1..n is needed (or the <= analogue for
    the beta form).  Finite supports are summed exactly; infinite supports
    are truncated with the signature's positive part scaling the bound (the
    beta form additionally carries the 2^n - 1 factor).
    """
    if not model.exchangeable:
        raise ValidationError("model is not declared exchangeable")
    if len(signature) != model.n:
        raise ValidationError(f"signature has length {len(signature)}, expected {model.n}")
    if p < 1:
        raise ValidationError(f"moment order p={p} must be >= 1")
    if form not in ("alpha", "beta"):
        raise ValidationError(f"form must be alpha or beta, not {form!r}")
    coeffs = {
        frozenset(range(1, i + 1)): a for i, a in enumerate(signature, start=1) if a != 0
    }
    m_max = model.support_max()
    if m_max is not None:
        if m_max == 0:
            return MomentResult(value=0.0, exact=True)
        series = _system_survival_series(model, coeffs, m_max - 1, form)
        return MomentResult(value=float(np.dot(_weights(p, m_max - 1), series)), exact=True)
    if d is None:
        raise ValidationError("infinite support needs an error bound d")
    if not d > 0.0:
        raise ValidationError(f"error bound d={d} must be positive")
    pos = sum(c for c in coeffs.values() if c > 0)
    scaled = d / pos if form == "alpha" else d / ((2**model.n - 1) * pos)
    plan = _dominant_truncation(model, p, scaled)
    series = _system_survival_series(model, coeffs, plan.M0, form)
    value = float(np.dot(_weights(p, plan.M0), series))
    return MomentResult(value=value, exact=False, M0_used=plan.M0, error_bound=d)
