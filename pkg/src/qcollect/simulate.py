"""Monte Carlo model of the four-photon coincidence measurement.

Each setting projects photon 1 of copy I and photon 3 of copy II onto fixed
polarizations; the remaining photons meet on a balanced beam splitter.  Per
trial the projections succeed with probability p_I p_J, and a four-fold
(anticoalescence) coincidence follows with probability

    overlapped run:      nu * tr[P^-(sigma_I (x) sigma_J)] + (1 - nu) / 2
    non-overlapped run:  1/2

where nu is the two-photon mode overlap.  Distinguishable photons split with
probability 1/2 regardless of polarization, which makes the parasitic
relative rate ccN/ccB equal 1 - nu by construction.  Counts are accumulated
into cc_a (overlapped) and cc_b (non-overlapped); calibration fills cc_n and
the corrected ratio (cc_a - cc_n)/(cc_b - cc_n) estimates the doubled
singlet detection rate.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    CountsSchemaError,
    DegenerateDenominatorError,
    MissingSettingError,
)
from .states import (
    DEGENERATE_WEIGHT,
    KET_A,
    KET_D,
    KET_H,
    KET_V,
    project_qubit_a,
    singlet_overlap_unnormalized,
    validate_two_qubit_state,
)

POLARIZATION_KETS = {"H": KET_H, "V": KET_V, "D": KET_D, "A": KET_A}

#: Projection pairs entering the witness, in canonical (stream) order.
WITNESS_PAIRS = ("HH", "VV", "HV", "DD")

#: Same-polarization settings averaged for the parasitic-noise level.
CALIBRATION_PAIRS = ("HH", "VV")

VALID_PAIRS = tuple(a + b for a in "HVD" for b in "HVD")

# Fixed RNG stream indices so results are independent of scheduling order.
_STREAM_WITNESS = {pair: i for i, pair in enumerate(WITNESS_PAIRS)}
_STREAM_CALIBRATION = {pair: 4 + i for i, pair in enumerate(CALIBRATION_PAIRS)}
_STREAM_BOOTSTRAP = 6
_STREAM_TWOFOLD_INTERFERENCE = 7
_STREAM_TWOFOLD_PROJECTION = {pair: 8 + i for i, pair in enumerate(WITNESS_PAIRS)}

COUNTS_COLUMNS = ("pair", "cc_a", "cc_b", "cc_n", "exposure", "seed")


@dataclass(frozen=True)
class NoiseModel:
    """Two-photon mode overlap nu, preparation balance xi and the RNG seed.

    nu = 1 reproduces the ideal experiment; the parasitic relative rate is
    ccN/ccB = 1 - nu.  xi is the probability that both photons of one
    generated pair are horizontally polarized.
    """

    overlap: float = 1.0
    xi: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.overlap <= 1.0:
            raise ValueError(f"mode overlap must be in [0, 1], got {self.overlap}")
        if not 0.0 <= self.xi <= 1.0:
            raise ValueError(f"xi must be in [0, 1], got {self.xi}")


#: Presets for the measured parasitic rates (ccN/ccB = 1 - nu) and the
#: preparation balances achieved for the three reference states.
NOISE_PRESETS = {
    "ideal": NoiseModel(overlap=1.0, xi=0.5),
    "bell": NoiseModel(overlap=1.0 - 0.57, xi=0.5),
    "separable": NoiseModel(overlap=1.0 - 0.49, xi=1.0),
    "mixed": NoiseModel(overlap=1.0 - 0.85, xi=0.5),
}


@dataclass(frozen=True)
class CoincidenceRecord:
    """Counts for one projection pair at one exposure.

    cc_a: overlapped (interference) run, cc_b: non-overlapped run,
    cc_n: parasitic level attributed to this record (same exposure).
    Counts are real-valued to allow dataset mixing.
    """

    pair: str
    cc_a: float
    cc_b: float
    cc_n: float
    exposure: float
    seed: int

    def __post_init__(self):
        if self.pair not in VALID_PAIRS:
            raise CountsSchemaError(f"unknown projection pair {self.pair!r}")
        if min(self.cc_a, self.cc_b, self.cc_n) < 0.0:
            raise CountsSchemaError(f"negative count in pair {self.pair}")
        if self.exposure <= 0:
            raise CountsSchemaError(f"exposure must be positive in pair {self.pair}")


@dataclass(frozen=True)
class WitnessEstimate:
    """Witness value reconstructed from coincidence ratios.

    ratios maps each projection pair to its corrected ratio, or None when
    the setting was skipped as non-contributing (zero coefficient).
    """

    w: float
    sigma_w: float
    ratios: dict
    xi_used: float
    method: str = "from-counts"
    notes: tuple = ()


def _pair_probabilities(rho, pair):
    """(projection success probability p_I p_J, singlet overlap of the
    conditional states).  Degenerate projections return (0, 0)."""
    chi_i, p_i = project_qubit_a(rho, POLARIZATION_KETS[pair[0]])
    chi_j, p_j = project_qubit_a(rho, POLARIZATION_KETS[pair[1]])
    p_succ = p_i * p_j
    if p_i < DEGENERATE_WEIGHT or p_j < DEGENERATE_WEIGHT:
        return 0.0, 0.0
    q = singlet_overlap_unnormalized(chi_i, chi_j) / p_succ
    return p_succ, min(max(q, 0.0), 0.5)


def _setting_rng(noise, stream):
    return np.random.default_rng((noise.seed, stream))


def simulate_setting(rho, pair, noise, trials, rng=None, stream=0):
    """Simulate both runs of one projection pair and return its record.

    Draws the overlapped (cc_a) and non-overlapped (cc_b) counts as
    binomials of the per-trial coincidence probabilities; cc_n is left at
    zero until a calibration level is applied.  Reproducible given
    (noise.seed, stream).
    """
    if trials <= 0:
        raise ValueError(f"trials must be positive, got {trials}")
    if rng is None:
        rng = _setting_rng(noise, stream)
    p_succ, q = _pair_probabilities(rho, pair)
    nu = noise.overlap
    p_a = min(max(p_succ * (nu * q + (1.0 - nu) * 0.5), 0.0), 1.0)
    p_b = min(max(p_succ * 0.5, 0.0), 1.0)
    cc_a = float(rng.binomial(trials, p_a))
    cc_b = float(rng.binomial(trials, p_b))
    return CoincidenceRecord(
        pair=pair, cc_a=cc_a, cc_b=cc_b, cc_n=0.0, exposure=float(trials),
        seed=noise.seed,
    )


def _calibration_records(rho, noise, trials):
    return tuple(
        simulate_setting(rho, pair, noise, trials, stream=_STREAM_CALIBRATION[pair])
        for pair in CALIBRATION_PAIRS
    )


def estimate_ccN(rho, noise, trials):
    """Average overlapped count of the HH and VV calibration settings.

    This is the same-polarization averaging procedure; it estimates the
    parasitic level exactly when those settings show no genuine
    anticoalescence (identical pure conditionals), and conflates signal with
    noise otherwise (maximally mixed state).
    """
    records = _calibration_records(rho, noise, trials)
    return sum(rec.cc_a for rec in records) / len(records)


def relative_noise_rate(calibration_records):
    """Estimated ccN/ccB: summed overlapped over summed non-overlapped counts."""
    total_a = sum(rec.cc_a for rec in calibration_records)
    total_b = sum(rec.cc_b for rec in calibration_records)
    if total_b <= 0.0:
        return 0.0
    return total_a / total_b


def corrected_ratio(record):
    """(cc_a - cc_n)/(cc_b - cc_n), clamped to [0, 2]."""
    denom = record.cc_b - record.cc_n
    if denom <= 0.0:
        raise DegenerateDenominatorError(
            f"cc_b - cc_n = {denom:g} for pair {record.pair}; no ratio can be formed",
            pair=record.pair,
        )
    ratio = (record.cc_a - record.cc_n) / denom
    return min(max(ratio, 0.0), 2.0)


def ratio_variance(record):
    """First-order Poisson variance of the corrected ratio (counts treated
    as independent with variance equal to the observed count)."""
    denom = record.cc_b - record.cc_n
    d_a = 1.0 / denom
    d_b = -(record.cc_a - record.cc_n) / denom**2
    d_n = (record.cc_a - record.cc_b) / denom**2
    return d_a**2 * record.cc_a + d_b**2 * record.cc_b + d_n**2 * record.cc_n


def _record_map(records):
    if isinstance(records, dict):
        records = records.values()
    out = {}
    for rec in records:
        if rec.pair in out:
            raise CountsSchemaError(f"duplicate projection pair {rec.pair}")
        out[rec.pair] = rec
    return out


def _contributing_pairs(xi):
    pairs = {"DD"}
    if xi > 0.0:
        pairs.add("HH")
    if xi < 1.0:
        pairs.add("VV")
    if 0.0 < xi < 1.0:
        pairs.add("HV")
    return pairs


def _plugin_witness(ratios, xi):
    """W from corrected ratios; zero-coefficient terms are skipped so their
    ratios may be absent or None."""
    eta = 2.0 * ratios["DD"]
    sqrt_coeff = 8.0 * xi * (1.0 - xi)
    if sqrt_coeff != 0.0:
        eta += sqrt_coeff * math.sqrt(ratios["HH"] * ratios["VV"])
    total = eta - 1.0
    for pair, coeff in (
        ("HH", xi**2),
        ("VV", (1.0 - xi) ** 2),
        ("HV", 2.0 * xi * (1.0 - xi)),
    ):
        if coeff != 0.0:
            total += coeff * (1.0 - ratios[pair])
    return 0.5 * total


def _sigma_from_ratios(ratios, variances, xi, contributing):
    """Delta-method sigma, evaluated as a secant slope over +-1 sigma of each
    ratio so the sqrt term stays finite at the clamped r = 0 boundary."""
    total = 0.0
    for pair in contributing:
        var = variances[pair]
        if var is None or var <= 0.0:
            continue
        sig = math.sqrt(var)
        hi = min(ratios[pair] + sig, 2.0)
        lo = max(ratios[pair] - sig, 0.0)
        if hi <= lo:
            continue
        perturbed_hi = dict(ratios, **{pair: hi})
        perturbed_lo = dict(ratios, **{pair: lo})
        slope = (_plugin_witness(perturbed_hi, xi) - _plugin_witness(perturbed_lo, xi)) / (hi - lo)
        total += (slope * sig) ** 2
    return math.sqrt(total)


def witness_from_counts(records, xi):
    """Reconstruct the witness from coincidence records of {HH, VV, HV, DD}.

    W = 1/2 [eta + xi^2 (1 - r_HH) + (1 - xi)^2 (1 - r_VV)
             + 2 xi (1 - xi)(1 - r_HV) - 1],
    eta = 8 xi (1 - xi) sqrt(r_HH r_VV) + 2 r_DD.

    Settings whose coefficients vanish (e.g. r_VV and r_HV at xi = 1) are
    skipped; a degenerate denominator in a contributing setting raises.
    sigma_w propagates Poisson errors of each count through the ratio and
    witness expressions.
    """
    if not 0.0 <= xi <= 1.0:
        raise ValueError(f"xi must be in [0, 1], got {xi}")
    recmap = _record_map(records)
    missing = [pair for pair in WITNESS_PAIRS if pair not in recmap]
    if missing:
        raise MissingSettingError(
            f"missing required projection pair(s): {', '.join(missing)}"
        )
    contributing = _contributing_pairs(xi)
    ratios = {}
    variances = {}
    for pair in WITNESS_PAIRS:
        try:
            ratios[pair] = corrected_ratio(recmap[pair])
            variances[pair] = ratio_variance(recmap[pair])
        except DegenerateDenominatorError:
            if pair in contributing:
                raise
            ratios[pair] = None
            variances[pair] = None
    w = _plugin_witness(ratios, xi)
    sigma_w = _sigma_from_ratios(ratios, variances, xi, contributing)
    return WitnessEstimate(w=w, sigma_w=sigma_w, ratios=ratios, xi_used=xi)


def bootstrap_sigma(records, xi, n_resamples=1000, seed=0):
    """Bootstrap cross-check of sigma_w: Poisson-resample every count and
    recompute the witness.  Resamples that lose a contributing denominator
    are dropped."""
    recmap = _record_map(records)
    rng = np.random.default_rng((seed, _STREAM_BOOTSTRAP))
    values = []
    for _ in range(n_resamples):
        resampled = [
            replace(
                rec,
                cc_a=float(rng.poisson(rec.cc_a)),
                cc_b=float(rng.poisson(rec.cc_b)),
                cc_n=float(rng.poisson(rec.cc_n)) if rec.cc_n > 0.0 else 0.0,
            )
            for rec in recmap.values()
        ]
        try:
            values.append(witness_from_counts(resampled, xi).w)
        except DegenerateDenominatorError:
            continue
    if len(values) < 2:
        raise DegenerateDenominatorError(
            "bootstrap failed: nearly all resamples lost a contributing denominator"
        )
    return float(np.std(values, ddof=1))


def werner_mix(bell_records, mixed_records, p):
    """Interpolate two recorded campaigns to the Werner state of parameter p.

    Every counter is mixed with effective weights p^2 (entangled dataset)
    and 1 - p^2 (mixed dataset); counts become real-valued.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"Werner parameter must be in [0, 1], got {p}")
    bell_map = _record_map(bell_records)
    mixed_map = _record_map(mixed_records)
    if set(bell_map) != set(mixed_map):
        raise MissingSettingError(
            "mismatched settings: "
            f"{sorted(set(bell_map) ^ set(mixed_map))} not present in both datasets"
        )
    weight = p * p
    out = []
    for pair in bell_map:
        rb, rm = bell_map[pair], mixed_map[pair]
        out.append(
            CoincidenceRecord(
                pair=pair,
                cc_a=weight * rb.cc_a + (1.0 - weight) * rm.cc_a,
                cc_b=weight * rb.cc_b + (1.0 - weight) * rm.cc_b,
                cc_n=weight * rb.cc_n + (1.0 - weight) * rm.cc_n,
                exposure=weight * rb.exposure + (1.0 - weight) * rm.exposure,
                seed=rb.seed,
            )
        )
    return out


@dataclass(frozen=True)
class CampaignResult:
    """Everything produced by one simulated campaign."""

    estimate: WitnessEstimate
    records: tuple
    calibration_records: tuple
    ccn_count: float
    ccn_relative: float
    relative_applied: float
    calibration_mode: str


def run_campaign(rho, noise, trials, calibration="self"):
    """Simulate the four witness settings plus the two calibration settings,
    apply the noise subtraction and reconstruct the witness.

    calibration modes:
      self   subtract the HH/VV self-calibrated relative rate (unbiased for
             states whose same-polarization conditionals do not anticoalesce)
      known  subtract the noise model's true relative rate 1 - nu, as an
             independently measured interference noise level; the
             self-calibration estimate is still reported, with a bias note
             when it disagrees
      none   no subtraction

    Deterministic given noise.seed; every setting uses its own RNG stream.
    """
    if calibration not in ("self", "known", "none"):
        raise ValueError(f"unknown calibration mode {calibration!r}")
    rho = validate_two_qubit_state(rho)
    raw = [
        simulate_setting(rho, pair, noise, trials, stream=_STREAM_WITNESS[pair])
        for pair in WITNESS_PAIRS
    ]
    cal_records = _calibration_records(rho, noise, trials)
    ccn_count = sum(rec.cc_a for rec in cal_records) / len(cal_records)
    ccn_relative = relative_noise_rate(cal_records)
    if calibration == "self":
        applied = ccn_relative
    elif calibration == "known":
        applied = 1.0 - noise.overlap
    else:
        applied = 0.0
    records = tuple(replace(rec, cc_n=applied * rec.cc_b) for rec in raw)
    estimate = witness_from_counts(records, noise.xi)
    notes = []
    if calibration == "known" and abs(ccn_relative - applied) > 0.01:
        notes.append(
            "calibration-bias: the same-polarization (HH/VV) self-calibration "
            f"estimates ccN/ccB = {ccn_relative:.3f}, but those settings retain "
            "genuine anticoalescence for states with mixed conditionals, so the "
            "average conflates signal with parasitic background; the applied "
            f"level {applied:.3f} is the independently known interference noise."
        )
    if notes:
        estimate = replace(estimate, notes=tuple(notes))
    return CampaignResult(
        estimate=estimate,
        records=records,
        calibration_records=cal_records,
        ccn_count=ccn_count,
        ccn_relative=ccn_relative,
        relative_applied=applied,
        calibration_mode=calibration,
    )


def expected_records(rho, noise=None, exposure=10**6):
    """Expectation-valued records with the exact parasitic level in cc_n.

    The corrected ratios of these records equal the ideal doubled singlet
    detection rates exactly, for any mode overlap; used as the analytic
    limit of the simulation and as input for estimator-identity checks.
    """
    if noise is None:
        noise = NoiseModel()
    rho = validate_two_qubit_state(rho)
    nu = noise.overlap
    out = []
    for pair in WITNESS_PAIRS:
        p_succ, q = _pair_probabilities(rho, pair)
        cc_b = exposure * p_succ * 0.5
        out.append(
            CoincidenceRecord(
                pair=pair,
                cc_a=exposure * p_succ * (nu * q + (1.0 - nu) * 0.5),
                cc_b=cc_b,
                cc_n=(1.0 - nu) * cc_b,
                exposure=float(exposure),
                seed=noise.seed,
            )
        )
    return out


def _reduced_state_b(rho):
    r4 = np.asarray(rho, dtype=complex).reshape(2, 2, 2, 2)
    return np.einsum("abac->bc", r4)


def twofold_product_records(rho, noise, trials):
    """Literal two-fold-product synthesis of the four-fold counts.

    Projection coincidences are drawn per pair; one shared interference run
    of the (unconditioned) reduced states provides the bunching factor, and
    its parasitic level feeds cc_n.  Statistically equivalent to the direct
    pipeline only when conditioning does not change the interfering states,
    i.e. for the maximally mixed state; provided for comparison.
    """
    rho = validate_two_qubit_state(rho)
    nu = noise.overlap
    sigma_b = _reduced_state_b(rho)
    q24 = singlet_overlap_unnormalized(sigma_b, sigma_b)
    rng24 = _setting_rng(noise, _STREAM_TWOFOLD_INTERFERENCE)
    cc24_a = float(rng24.binomial(trials, min(max(nu * q24 + (1.0 - nu) * 0.5, 0.0), 1.0)))
    cc24_b = float(rng24.binomial(trials, 0.5))
    cc24_n = (1.0 - nu) * cc24_b
    out = []
    for pair in WITNESS_PAIRS:
        p_succ, _ = _pair_probabilities(rho, pair)
        rng13 = _setting_rng(noise, _STREAM_TWOFOLD_PROJECTION[pair])
        c13 = float(rng13.binomial(trials, min(max(p_succ, 0.0), 1.0)))
        out.append(
            CoincidenceRecord(
                pair=pair,
                cc_a=c13 * cc24_a / trials,
                cc_b=c13 * cc24_b / trials,
                cc_n=c13 * cc24_n / trials,
                exposure=float(trials),
                seed=noise.seed,
            )
        )
    return out


def write_counts(path, records):
    """Write records as the counts dataset (CSV, lossless float repr)."""
    lines = [",".join(COUNTS_COLUMNS)]
    for rec in records:
        lines.append(
            ",".join(
                (
                    rec.pair,
                    repr(float(rec.cc_a)),
                    repr(float(rec.cc_b)),
                    repr(float(rec.cc_n)),
                    repr(float(rec.exposure)),
                    str(int(rec.seed)),
                )
            )
        )
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def read_counts(path):
    """Read a counts dataset back; schema violations name the row/column."""
    with open(path, newline="") as fh:
        lines = [line.rstrip("\n") for line in fh if line.strip()]
    if not lines:
        raise CountsSchemaError("empty counts file")
    header = tuple(lines[0].split(","))
    if header != COUNTS_COLUMNS:
        raise CountsSchemaError(
            f"bad header {','.join(header)!r}; expected {','.join(COUNTS_COLUMNS)!r}"
        )
    records = []
    for i, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != len(COUNTS_COLUMNS):
            raise CountsSchemaError(
                f"row {i}: expected {len(COUNTS_COLUMNS)} columns, got {len(cells)}"
            )
        pair = cells[0]
        if pair not in VALID_PAIRS:
            raise CountsSchemaError(f"row {i}, column pair: unknown pair {pair!r}")
        numeric = {}
        for name, cell in zip(COUNTS_COLUMNS[1:], cells[1:]):
            try:
                numeric[name] = float(cell)
            except ValueError:
                raise CountsSchemaError(
                    f"row {i}, column {name}: not a number: {cell!r}"
                ) from None
        if min(numeric["cc_a"], numeric["cc_b"], numeric["cc_n"]) < 0.0:
            raise CountsSchemaError(f"row {i}: negative count")
        if numeric["exposure"] <= 0.0:
            raise CountsSchemaError(f"row {i}, column exposure: must be positive")
        records.append(
            CoincidenceRecord(
                pair=pair,
                cc_a=numeric["cc_a"],
                cc_b=numeric["cc_b"],
                cc_n=numeric["cc_n"],
                exposure=numeric["exposure"],
                seed=int(numeric["seed"]),
            )
        )
    return records
