"""Lattice measurement of indecomposability parameters and campaign driver.

One measurement at fixed ``L``:

1. build the chain in the sector of the left module of the diamond,
2. compute the low spectrum and its Jordan structure,
3. locate ``xi`` and the Jordan cell ``(phi, psi)``,
4. realize ``A`` with lattice Virasoro modes,
5. ``beta^(L) = <psi|A xi>^2 / <psi|phi>`` with ``<xi|xi> = 1``.

Series over ``L`` are extrapolated with ``beta + a/L + b/L^2``.
"""

from __future__ import annotations

import configparser
import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidTheoryError, LogCouplingError, NormalizationError
from .koo_saleur import PLAIN, SYMMETRIZED, realize_word
from .lattice.dilute import VERTEX, DiluteChain, DiluteSpec
from .lattice.tl import FREE_FERMION, XXZ, ChainSpec, DenseChain
from .spectral import annotate_weights, identify_multiplet, jordanize, low_spectrum
from .symbolic.beta import beta_exact
from .symbolic.kac import as_fraction
from .symbolic.verma import ACONV, L1POWER
from .symbolic.staggered import StaggeredShape, staggered_shape

DENSE = "dense"
DILUTE = "dilute"
DILUTE_LAMBDA = 3 * math.pi / 8


@dataclass(frozen=True)
class Theory:
    """What to measure: a diamond of a dense or dilute chain.

    Attributes
    ----------
    family : str
        ``"dense"`` or ``"dilute"``.
    x0 : Fraction
        Kac parameter of the theory (dilute: ``x0 = pi/(4 lambda - pi)``).
    j : Fraction
        Spin of the diamond.
    representation : str
        ``"xxz"`` or ``"free_fermion"`` (dense), ``"vertex"`` (dilute).
    variant : str, optional
        Lattice realization of ``A``; ``None`` picks plain (dense) or
        symmetrized (dilute).
    window : float
        Half-width of the ``h^(L)`` window used for identification.
    convention : str
        Normalization of ``A`` (leading ``L_{-n}`` or leading ``L_{-1}^n``).
    """

    family: str
    x0: Fraction
    j: Fraction
    representation: str = XXZ
    variant: Optional[str] = None
    window: float = 0.5
    convention: str = ACONV

    def __post_init__(self):
        object.__setattr__(self, "x0", as_fraction(self.x0))
        object.__setattr__(self, "j", Fraction(self.j))
        if self.family not in (DENSE, DILUTE):
            raise InvalidTheoryError(f"unknown family {self.family!r}")
        allowed = (XXZ, FREE_FERMION) if self.family == DENSE else (VERTEX,)
        if self.representation not in allowed:
            raise InvalidTheoryError(
                f"representation {self.representation!r} cannot host Jordan cells for {self.family}"
            )

    @property
    def shape(self) -> StaggeredShape:
        return staggered_shape(self.family, self.x0, self.j)

    @property
    def a_variant(self) -> str:
        if self.variant is not None:
            return self.variant
        return PLAIN if self.family == DENSE else SYMMETRIZED

    @property
    def sector(self) -> Fraction:
        """``S_z`` of the sector hosting the Jordan cell: the left module spin ``j1``."""
        return self.shape.j1

    @property
    def lam(self) -> float:
        """Dilute anisotropy with ``x0 = pi / (4 lambda - pi)``."""
        return math.pi * (1 + 1 / float(self.x0)) / 4

    def sizes_allowed(self, L: int) -> bool:
        return (Fraction(L, 2) - self.sector).denominator == 1

    def label(self) -> str:
        r, s = self.shape.kac_label_psi
        return f"{self.family} x0={self.x0} beta_{{{r},{s}}}"


@dataclass
class BetaSample:
    """One finite-size measurement."""

    L: int
    beta: complex
    h_xi: float
    h_psi: float
    gauge_spread: float
    beta_modulus: complex
    overlap: float
    seconds: float


@dataclass
class Extrapolation:
    """Least-squares fit ``beta + a_1/L + ... + a_d/L^d``; ``coefficients`` holds ``a_1..a_d``."""

    beta: float
    coefficients: Tuple[float, ...]
    residual: float
    error: float
    sizes: Tuple[int, ...]
    degree: int


@dataclass
class BetaSeries:
    """Finite-size measurements of one diamond and their extrapolation."""

    theory: Theory
    samples: Dict[int, BetaSample] = field(default_factory=dict)
    extrapolation: Optional[Extrapolation] = None

    def add(self, sample: BetaSample) -> None:
        if self.samples and sample.L <= max(self.samples):
            raise ValueError("samples must be added with increasing L")
        if (sample.L - min(self.samples, default=sample.L)) % 2:
            raise ValueError("samples must share the parity of L")
        self.samples[sample.L] = sample

    @property
    def sizes(self) -> List[int]:
        return sorted(self.samples)

    def values(self) -> np.ndarray:
        return np.array([self.samples[L].beta.real for L in self.sizes])


# -- chains -------------------------------------------------------------------------

def build_measurement_chain(theory: Theory, L: int):
    """Chain in the Jordan-cell sector and the chain defining the ground energy."""
    if not theory.sizes_allowed(L):
        raise InvalidTheoryError(f"L={L} incompatible with S_z={theory.sector}")
    if theory.family == DENSE:
        chain = DenseChain(ChainSpec(L, theory.representation, theory.x0, theory.sector))
        ground = DenseChain(ChainSpec(L, XXZ, theory.x0, Fraction(L % 2, 2)))
    else:
        chain = DiluteChain(DiluteSpec(L, theory.lam, theory.sector, VERTEX))
        ground = chain if theory.sector == 0 else DiluteChain(DiluteSpec(L, theory.lam, 0, VERTEX))
    return chain, ground


def ground_energy(chain) -> float:
    return float(low_spectrum(chain.hamiltonian, k=1).eigenvalues[0].real)


def beta_lattice(
    theory: Theory,
    L: int,
    k: int = 30,
    tol: float = 1e-6,
    use_overlap: bool = True,
) -> BetaSample:
    """Measure ``beta^(L)`` for ``theory`` on ``L`` sites.

    The numerator is the algebraic square of the bilinear pairing; the
    complex-modulus variant is reported alongside.  ``gauge_spread`` is the
    change of ``beta^(L)`` when ``psi`` is replaced by its minimal-norm
    representative ``psi - gamma phi``.
    """
    start = time.perf_counter()
    shape = theory.shape
    chain, ground = build_measurement_chain(theory, L)
    ref = chain.reference()
    E0 = ground_energy(ground)
    record = low_spectrum(chain.hamiltonian, k=k)
    blocks = jordanize(record, tol=tol, scale=math.pi * ref.v_F / L)
    annotate_weights(blocks, E0, L, ref.v_F)
    word = realize_word(shape_operator(shape, theory.convention), chain, theory.a_variant, on_vacuum=shape.j1 == 0)
    xi, cell = identify_multiplet(
        blocks,
        float(shape.h_xi),
        float(shape.h_psi),
        window=theory.window,
        probe=word.apply if use_overlap else None,
    )
    norm = chain.pair(xi.phi, xi.phi)
    if abs(norm) < 1e-300:
        raise NormalizationError("xi has vanishing bilinear norm")
    xv = xi.phi / np.sqrt(norm)
    axi = word.apply(xv)
    den = chain.pair(cell.psi, cell.phi)
    if abs(den) < 1e-14 * np.linalg.norm(cell.psi) * np.linalg.norm(cell.phi):
        raise NormalizationError("<psi|phi> vanishes")
    num = chain.pair(cell.psi, axi)
    beta = num ** 2 / den
    alt = chain.pair(cell.psi_min_norm, axi) ** 2 / den
    overlap = float(abs(np.vdot(cell.phi, axi)) / (np.linalg.norm(cell.phi) * np.linalg.norm(axi)))
    return BetaSample(
        L,
        complex(beta),
        xi.h,
        cell.h,
        float(abs(beta - alt)),
        complex(abs(num) ** 2 / den),
        overlap,
        time.perf_counter() - start,
    )


def shape_operator(shape: StaggeredShape, convention: str = ACONV):
    """The normalized operator ``A`` of the diamond."""
    return beta_exact(shape, convention).operator


# -- extrapolation -----------------------------------------------------------------

def extrapolate(series: BetaSeries, degree: Optional[int] = None, window: Optional[int] = None) -> Extrapolation:
    """Fit a polynomial of ``degree`` in ``1/L`` to the largest ``window`` sizes.

    ``degree`` defaults to 2, or 1 when only three samples are used.  The
    error combines the spread of the fit when the smallest used size is
    dropped (or the residual when that is impossible) with the largest gauge
    spread of the samples used.
    """
    sizes = series.sizes
    if window is not None:
        sizes = sizes[-window:]
    if len(sizes) < 3:
        raise ValueError("extrapolation needs at least three samples")
    if degree is None:
        degree = 1 if len(sizes) == 3 else 2
    beta, coeffs, residual = _fit(series, sizes, degree)
    if len(sizes) > degree + 1:
        alt, _, _ = _fit(series, sizes[1:], degree)
        error = abs(beta - alt)
    else:
        shorter = series.sizes[-len(sizes) - 1 : -1]
        error = abs(beta - _fit(series, shorter, degree)[0]) if len(shorter) == len(sizes) else residual
    error = max(error, max(series.samples[L].gauge_spread for L in sizes))
    result = Extrapolation(beta, coeffs, residual, error, tuple(sizes), degree)
    series.extrapolation = result
    return result


def _fit(series: BetaSeries, sizes: Sequence[int], degree: int):
    inv = 1.0 / np.asarray(sizes, dtype=float)
    design = np.column_stack([inv ** p for p in range(degree + 1)])
    values = np.array([series.samples[L].beta.real for L in sizes])
    coef, _, rank, _ = np.linalg.lstsq(design, values, rcond=None)
    if rank < degree + 1:
        raise ValueError("rank-deficient extrapolation")
    residual = float(np.linalg.norm(design @ coef - values))
    return float(coef[0]), tuple(float(c) for c in coef[1:]), residual


# -- campaigns ---------------------------------------------------------------------

@dataclass(frozen=True)
class Job:
    """A series of measurements with an acceptance tolerance on the extrapolation."""

    name: str
    theory: Theory
    sizes: Tuple[int, ...]
    tolerance: Optional[float] = None
    degree: Optional[int] = None
    window: Optional[int] = None
    k: int = 30
    bounds: Optional[Tuple[float, float]] = None


@dataclass
class JobResult:
    job: Job
    series: Optional[BetaSeries]
    exact: Optional[Fraction]
    error: Optional[str] = None

    @property
    def passed(self) -> Optional[bool]:
        if self.error is not None:
            return False
        if self.series is None or self.series.extrapolation is None:
            return None
        value = self.series.extrapolation.beta
        if self.job.bounds is not None:
            lo, hi = self.job.bounds
            return lo <= value <= hi
        if self.job.tolerance is None or self.exact is None:
            return None
        return abs(value - float(self.exact)) <= self.job.tolerance


def _dense(x0, j, sizes, tol, name, convention=ACONV, **kw) -> Job:
    theory = Theory(DENSE, as_fraction(x0), Fraction(j), window=kw.pop("cell_window", 0.5), convention=convention)
    return Job(name, theory, tuple(sizes), tol, **kw)


PRESETS: Dict[str, List[Job]] = {
    "reproduce-table-1": [
        _dense(1, 2, range(8, 19, 2), 0.01, "x=1 beta_{1,5}", window=4, degree=3),
        _dense(1, 3, range(8, 19, 2), 0.5, "x=1 beta_{1,7}", L1POWER, window=4, degree=3),
        _dense(1, 4, range(10, 19, 2), None, "x=1 beta_{1,9}", L1POWER, window=4, degree=3, cell_window=1.0),
    ],
    "reproduce-table-2": [
        _dense(2, Fraction(3, 2), range(7, 18, 2), 0.003, "percolation beta_{1,4}", window=4, degree=3),
        _dense(2, 2, range(8, 19, 2), 0.003, "percolation beta_{1,5}", window=4, degree=3),
        _dense("1/2", 3, range(8, 19, 2), 0.05, "x=1/2 beta_{1,7}", window=4, degree=3),
    ],
    "reproduce-table-3": [
        _dense(3, 2, range(8, 19, 2), 0.005, "Ising beta_{1,5}", window=4, degree=3),
    ],
    "reproduce-table-4": [
        Job(
            "dilute polymers beta_{3,1}",
            Theory(DILUTE, Fraction(2), Fraction(1), VERTEX, window=1.0),
            tuple(range(4, 11, 2)),
            None,
            window=3,
            k=20,
            bounds=(0.6, 1.1),
        ),
    ],
    "reproduce-table-5": [],
}

# (theory, family, x0, j, published value) for the exact table
EXACT_TABLE: List[Tuple[str, str, Fraction, Fraction, Fraction]] = [
    (name, fam, as_fraction(x0), Fraction(j), Fraction(value))
    for name, fam, x0, j, value in [
        ("percolation beta_{1,4}", DENSE, 2, Fraction(3, 2), "-1/2"),
        ("percolation beta_{1,5}", DENSE, 2, 2, "-5/8"),
        ("percolation beta_{1,7}", DENSE, 2, 3, "-35/3"),
        ("percolation beta_{1,8}", DENSE, 2, Fraction(7, 2), "-13475/216"),
        ("dense polymers beta_{1,5}", DENSE, 1, 2, "-1"),
        ("dense polymers beta_{1,7}", DENSE, 1, 3, "-9/2"),
        ("dense polymers beta_{1,9}", DENSE, 1, 4, "-75/4"),
        ("Ising beta_{1,5}", DENSE, 3, 2, "-35/24"),
        ("Ising beta_{1,6}", DENSE, 3, Fraction(5, 2), "-13475/243"),
        ("Ising beta_{1,7}", DENSE, 3, 3, "-49049/17496"),
        ("Ising beta_{1,9}", DENSE, 3, 4, "-40415375/944784"),
        ("tricritical Ising beta_{1,6}", DENSE, 4, Fraction(5, 2), "-693/100"),
        ("3-state Potts beta_{1,7}", DENSE, 5, 3, "-676039/59895"),
        ("dilute polymers beta_{3,1}", DILUTE, 2, 1, "5/6"),
        ("dilute polymers beta_{5,1}", DILUTE, 2, 2, "67375/676"),
        ("dilute Ising beta_{4,1}", DILUTE, 3, Fraction(3, 2), "175/12"),
        ("dilute Ising beta_{5,1}", DILUTE, 3, 2, "49049/15552"),
        ("LM(1,3) beta_{1,7}", DENSE, "1/2", 3, "-2"),
        ("LM(1,3) beta_{1,8}", DENSE, "1/2", Fraction(7, 2), "8"),
    ]
]


def reproduce_exact_table(convention: str = ACONV) -> List[dict]:
    """Exact couplings of :data:`EXACT_TABLE` with a match flag per entry."""
    rows = []
    for name, fam, x0, j, value in EXACT_TABLE:
        got = beta_exact(staggered_shape(fam, x0, j), convention).value
        rows.append({"name": name, "family": fam, "x0": str(x0), "j": str(j),
                     "beta": str(got), "published": str(value), "match": got == value})
    return rows


def run_job(job: Job) -> JobResult:
    """Measure every size of ``job``; failures are captured, not raised."""
    try:
        exact = beta_exact(job.theory.shape, job.theory.convention).value
    except LogCouplingError as exc:
        return JobResult(job, None, None, f"exact value unavailable: {exc}")
    series = BetaSeries(job.theory)
    try:
        for L in job.sizes:
            series.add(beta_lattice(job.theory, L, k=job.k))
        if len(series.samples) >= 3:
            extrapolate(series, job.degree, job.window)
    except (LogCouplingError, ValueError, np.linalg.LinAlgError) as exc:
        return JobResult(job, series, exact, f"{type(exc).__name__}: {exc}")
    return JobResult(job, series, exact)


def run_campaign(jobs: Sequence[Job], workers: int = 1) -> List[JobResult]:
    """Run independent jobs, optionally in worker processes; order is preserved."""
    if workers <= 1 or len(jobs) <= 1:
        return [run_job(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_job, jobs))


def exit_code(results: Iterable[JobResult]) -> int:
    """0 when every comparison passes, 2 on a tolerance failure, 1 on an error."""
    results = list(results)
    if any(r.error is not None for r in results):
        return 1
    if any(r.passed is False for r in results):
        return 2
    return 0


CSV_COLUMNS = ("theory", "representation", "sector", "L", "h_L", "beta_L_re", "beta_L_im", "gauge_spread")


def write_csv(results: Sequence[JobResult], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for res in results:
            if res.series is None:
                continue
            th = res.job.theory
            for L in res.series.sizes:
                s = res.series.samples[L]
                writer.writerow(
                    [res.job.name, th.representation, str(th.sector), L, f"{s.h_psi:.10g}",
                     f"{s.beta.real:.12g}", f"{s.beta.imag:.3e}", f"{s.gauge_spread:.3e}"]
                )


def summary(results: Sequence[JobResult]) -> dict:
    out = []
    for res in results:
        entry = {
            "name": res.job.name,
            "theory": res.job.theory.label(),
            "variant": res.job.theory.a_variant,
            "sizes": list(res.job.sizes),
            "exact": None if res.exact is None else str(res.exact),
            "exact_float": None if res.exact is None else float(res.exact),
            "tolerance": res.job.tolerance,
            "passed": res.passed,
            "error": res.error,
        }
        if res.series is not None and res.series.extrapolation is not None:
            entry["extrapolation"] = asdict(res.series.extrapolation)
        out.append(entry)
    return {"jobs": out, "exit_code": exit_code(results)}


def write_json(results: Sequence[JobResult], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary(results), fh, indent=2)


# -- configuration -----------------------------------------------------------------

def _sizes(text: str, lo: Optional[str], hi: Optional[str]) -> Tuple[int, ...]:
    if text:
        return tuple(int(t) for t in text.replace(",", " ").split())
    return tuple(range(int(lo), int(hi) + 1, 2))


def load_config(path) -> List[Job]:
    """Jobs from an INI file, one section per job.

    Keys: ``family``, ``x0`` (or ``lambda`` for dilute), ``j``,
    ``representation``, ``variant``, ``sizes`` or ``L_min``/``L_max``,
    ``tolerance``, ``degree``, ``window``, ``cell_window``, ``k``.
    """
    parser = configparser.ConfigParser()
    if not parser.read(path, encoding="utf-8"):
        raise FileNotFoundError(path)
    jobs = []
    for name in parser.sections():
        sec = parser[name]
        family = sec.get("family", DENSE)
        if "lambda" in sec:
            lam = float(sec["lambda"])
            x0 = Fraction(math.pi / (4 * lam - math.pi)).limit_denominator(1000)
        else:
            x0 = as_fraction(sec["x0"])
        theory = Theory(
            family,
            x0,
            Fraction(sec.get("j", "1")),
            sec.get("representation", XXZ if family == DENSE else VERTEX),
            sec.get("variant") or None,
            sec.getfloat("cell_window", 0.5 if family == DENSE else 1.0),
        )
        jobs.append(
            Job(
                name,
                theory,
                _sizes(sec.get("sizes", ""), sec.get("L_min"), sec.get("L_max")),
                sec.getfloat("tolerance") if "tolerance" in sec else None,
                sec.getint("degree") if "degree" in sec else None,
                sec.getint("window") if "window" in sec else None,
                sec.getint("k", 30),
            )
        )
    return jobs
