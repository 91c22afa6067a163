"""Verification battery: every estimate of the theory checked on seeded corpora.

Each check returns a :class:`Check` with measured brackets.  Rules:

* two-sided equivalences pass when every corpus ratio lies in ``[1/C, C]``
  with ``C = EQUIVALENCE_C``;
* one-sided embeddings pass when every ratio is at most ``C``;
* checks with a provable constant (stated per check) use that constant;
* "stable" brackets additionally need ``max/min <= STABILITY``.

Checks marked informational are reported and never fail a suite.
"""

from __future__ import annotations

import time
import zlib
from dataclasses import dataclass, field

import numpy as np

from .atoms import (
    atomic_synthesis,
    bump_family,
    make_bump_atoms,
    quasi_atomic_decomposition,
    required_K_L,
    validate_atom,
    verify_fj_decay,
)
from .besov import (
    BesovParams,
    besov_morrey_norm,
    besov_norm_sharp,
    besov_norm_star,
    besov_tilde_norm,
    besov_type_norm,
    besov_variable_norm,
    classical_besov_norm,
    classical_besov_type_norm,
    linfty_smoothness_norm,
)
from .config import RunConfig
from .corpus import band_limited_field, field_corpus, localized_field
from .exponents import VariableExponent, parse_exponent
from .filterbank import build_filterbank, calderon_residual, lp_blocks
from .grid import Grid
from .kernels import (
    convolve,
    eta_field,
    maximal_function,
    maximal_majorant_constant,
    verify_eta_lemmas,
    verify_hardy,
    verify_level_mixing,
    verify_r_trick,
)
from .sequences import (
    CoefficientSequence,
    coefficient_bound_check,
    inverse_phi_transform,
    lambda_star,
    lambda_star_threshold,
    phi_transform,
    seq_b_norm,
    seq_b_tilde_norm,
    sup_inf_sequences,
)
from .varlp import luxemburg_norm, mixed_norm, modular

__all__ = ["Check", "SUITES", "run_suite", "EQUIVALENCE_C", "STABILITY"]

EQUIVALENCE_C = 10.0
STABILITY = 2.0


@dataclass
class Check:
    name: str
    passed: bool
    informational: bool = False
    measured: dict = field(default_factory=dict)
    wall_time_s: float = 0.0

    @property
    def status(self) -> str:
        if self.informational:
            return "INFO"
        return "PASS" if self.passed else "FAIL"


def _rng(cfg: RunConfig, name: str):
    return np.random.default_rng([cfg.seed, zlib.crc32(name.encode())])


def _bracket(values) -> dict:
    v = np.asarray(values, dtype=float)
    return {"min": float(v.min()), "max": float(v.max()), "spread": float(v.max() / v.min()) if v.min() > 0 else float("inf")}


def _two_sided(values, C=EQUIVALENCE_C) -> tuple:
    b = _bracket(values)
    return b, bool(np.isfinite(b["max"]) and b["min"] >= 1 / C and b["max"] <= C)


def _one_sided(values, C=EQUIVALENCE_C) -> tuple:
    b = _bracket(values)
    return b, bool(np.isfinite(b["max"]) and b["max"] <= C)


def _corpus(cfg: RunConfig, name: str, size=None, band=None):
    band = 2.0 ** (cfg.V - 1) if band is None else band
    return field_corpus(cfg.grid, _rng(cfg, name), cfg.data["corpus_size"] if size is None else size, band)


def _params(cfg: RunConfig, **kw) -> BesovParams:
    args = dict(alpha=cfg.alpha, p=cfg.p, q=cfg.q, tau=cfg.tau, bank=cfg.bank, top_level=cfg.V)
    args.update(kw)
    return BesovParams(**args)


def _expo(text, grid, cls="P0"):
    return parse_exponent(text, grid, cls)


def _values(grid: Grid, values, cls="real"):
    return VariableExponent(grid, values, exponent_class=cls)


# kernels suite


def check_eta_lemmas(cfg: RunConfig) -> list:
    grid = cfg.grid
    top = min(cfg.V, grid.resolution_exponent - 2) - (1 if grid.dim == 2 else 0)
    rep = verify_eta_lemmas(grid, range(0, top), m_exp=3.0, r=0.5)
    out = []
    for key, label in (
        ("two_kernels", "eta: convolution of two kernels"),
        ("cube_average", "eta: cube average"),
        ("r_power", "eta: r-power rule"),
        ("smoothness_shift", "eta: variable smoothness shift"),
    ):
        chk = rep[key]
        lo, hi = chk.bracket
        spreads = chk.group_spreads()
        out.append(Check(label, chk.passed, measured={
            "bracket_min": lo, "bracket_max": hi, "max_group_spread": max(spreads.values()),
            "pairs": len(chk.pairs),
        }))
    out[-1].measured["R"] = rep["R"]
    return out


def check_r_trick(cfg: RunConfig) -> list:
    grid = cfg.grid
    rng = _rng(cfg, "r-trick")
    diag, off, peetre = {}, {}, {}
    for N in (4.0, 8.0, 16.0):
        g = band_limited_field(grid, rng, N, decay=0.0)
        rep = verify_r_trick(g, (N, N / 4, 4 * N), N, r=0.5, m_exp=2.0)
        diag[N] = rep["ratios"][N]
        off[N] = max(rep["ratios"][N / 4], rep["ratios"][4 * N])
        peetre[N] = rep["peetre"]
    c = max(diag.values())
    ok = all(v <= STABILITY * c for v in off.values()) and np.isfinite(c)
    measured = {"diagonal_constant": c, "max_off_diagonal": max(off.values())}
    if all(v is not None for v in peetre.values()):
        measured["peetre_max"] = max(peetre.values())
    return [Check("r-trick single constant", bool(ok), measured=measured)]


def check_hardy(cfg: RunConfig) -> list:
    rep = verify_hardy(_rng(cfg, "hardy"), trials=10_000)
    measured = {}
    for q, r in rep.items():
        measured[f"q={q}.violations"] = r["violations"]
        measured[f"q={q}.max_ratio_to_constant"] = r["max_ratio_to_constant"]
    ok = all(r["violations"] == 0 for r in rep.values())
    return [Check("Hardy cascade bound on 10^4 sequences", ok, measured=measured)]


def check_majorant(cfg: RunConfig) -> list:
    grid = cfg.grid
    fields = _corpus(cfg, "majorant", size=4)
    worst = 0.0
    for v in (0, 2, 4):
        ker = eta_field(grid, v, 3.0)
        c = maximal_majorant_constant(grid, ker)
        for f in fields:
            a = f.abs()
            lhs = convolve(a, ker).data.real
            rhs = c * maximal_function(a).data
            worst = max(worst, float(np.max(lhs / rhs)))
    return [Check("eta majorized by the maximal function", worst <= 1 + 1e-9, measured={"max_ratio": worst})]


def _level_sets(cfg: RunConfig, count: int, levels: int):
    rng = _rng(cfg, "level-mixing")
    grid = cfg.grid
    sets = []
    for _ in range(count):
        amps = rng.exponential(size=levels) * (rng.random(levels) < 0.7)
        amps[rng.integers(levels)] = 1.0
        fs = []
        for k in range(levels):
            base = localized_field(grid, rng, 2.0 ** rng.integers(1, 5)) if k % 2 else band_limited_field(grid, rng, 8.0)
            fs.append(grid.field(amps[k] * np.abs(base.data)))
        sets.append(fs)
    return sets


def check_level_mixing(cfg: RunConfig) -> list:
    grid = cfg.grid
    sets = _level_sets(cfg, 20, min(cfg.V, 5) + 1)
    two = _expo("2", grid)
    out = []
    rep = verify_level_mixing(sets, 1.0, two, two, tau=_expo("4", grid))
    out.append(Check("level mixing, tau normalization (explicit constant)", rep["passed"],
                     measured={"max_ratio": rep["max_ratio"], "constant": rep["constant"]}))
    rep = verify_level_mixing(sets, 1.0, two, two, tilde=True)
    out.append(Check("level mixing, |P|^(1/p) normalization (explicit constant)", rep["passed"],
                     measured={"max_ratio": rep["max_ratio"], "constant": rep["constant"]}))
    if cfg.tau is not None and cfg.p.lower_bound >= 1 and not cfg.q.has_infinity and cfg.q.lower_bound >= 1:
        rep = verify_level_mixing(sets, 1.5, cfg.p, cfg.q, tau=cfg.tau)
        out.append(Check("level mixing, configured exponents", rep["passed"], informational=True,
                         measured={"max_ratio": rep["max_ratio"], "formula_with_tau_minus": rep["constant"]}))
    return out


# norms suite

_UNIT_BALL_EXPONENTS = (
    "2",
    "2 + 0.5*sin(2*pi*x/L)",
    "0.5 + 0.3*cos(2*pi*x/L)",
    "1 + 3*smoothstep(0.4*L, 0.6*L, x)",
    "1.2 + abs(sin(pi*x/L))",
)


def check_unit_ball(cfg: RunConfig) -> list:
    grid = cfg.grid
    rng = _rng(cfg, "unit-ball")
    fields = [band_limited_field(grid, rng, 2.0 ** rng.integers(1, cfg.V)) for _ in range(100)]
    mismatches = 0
    tested = 0
    worst_inside = 0.0
    for text in _UNIT_BALL_EXPONENTS:
        p = _expo(text.replace("L", f"{grid.box_length:g}"), grid)
        for f in fields:
            n = luxemburg_norm(p, f)
            for s in (0.5, 0.999, 1.001, 2.0):
                g = grid.field(f.data * (s / n))
                lux = luxemburg_norm(p, g)
                rho = modular(p, g)
                inside = lux <= 1
                mod_inside = rho.finite and rho.value <= 1 + 1e-9
                tested += 1
                if inside:
                    worst_inside = max(worst_inside, rho.value)
                if inside != mod_inside:
                    mismatches += 1
    return [Check("unit-ball property", mismatches == 0,
                  measured={"cases": tested, "mismatches": mismatches, "max_modular_inside": worst_inside})]


def check_constant_oracles(cfg: RunConfig) -> list:
    grid = cfg.grid
    fields = _corpus(cfg, "oracles")
    w = grid.cell_volume
    p3, q2 = _expo("3", grid), _expo("2", grid)
    alpha = _values(grid, np.full(grid.shape, 0.75))
    tau = _expo("4", grid)
    prm = BesovParams(alpha, _expo("2", grid), _expo("3", grid), tau, cfg.bank, cfg.V)
    gaps = {"luxemburg": 0.0, "mixed": 0.0, "besov_type": 0.0, "besov": 0.0}
    for f in fields:
        a = np.abs(f.data)
        lp = float(np.sum(a**3) * w) ** (1 / 3)
        gaps["luxemburg"] = max(gaps["luxemburg"], abs(luxemburg_norm(p3, f, 1e-13) / lp - 1))
        blocks = lp_blocks(f, cfg.bank, range(cfg.V + 1))
        fs = [grid.field(b) for b in blocks]
        closed = float(np.sum([(np.sum(np.abs(b) ** 3) * w) ** (2 / 3) for b in blocks]) ** 0.5)
        gaps["mixed"] = max(gaps["mixed"], abs(mixed_norm(p3, q2, fs, 1e-13) / closed - 1))
        fast = besov_type_norm(f, prm, tol=1e-13)
        slow = classical_besov_type_norm(f, 0.75, 2.0, 3.0, 0.25, cfg.bank, cfg.V)
        gaps["besov_type"] = max(gaps["besov_type"], abs(fast / slow - 1))
        fast = besov_variable_norm(f, alpha, _expo("2", grid), _expo("3", grid), cfg.bank, cfg.V, tol=1e-13)
        slow = classical_besov_norm(f, 0.75, 2.0, 3.0, cfg.bank, cfg.V)
        gaps["besov"] = max(gaps["besov"], abs(fast / slow - 1))
    return [Check(f"constant-exponent oracle: {k}", g <= 1e-8, measured={"max_relative_gap": g}) for k, g in gaps.items()]


def _ratios(fields, num, den):
    return [num(f) / den(f) for f in fields]


def check_sharp_star(cfg: RunConfig) -> list:
    fields = _corpus(cfg, "equivalence")
    prm = _params(cfg)
    out = []
    for space in ("B", "tilde"):
        if space == "B" and cfg.tau is None:
            continue
        base = {id(f): _base_norm(f, prm, space) for f in fields}
        b, ok = _two_sided([besov_norm_sharp(f, prm, space=space) / base[id(f)] for f in fields])
        out.append(Check(f"sharp norm vs base ({space})", ok, measured=b))
        for gamma in (1, 2):
            b, ok = _two_sided([besov_norm_star(f, prm, gamma, space=space) / base[id(f)] for f in fields])
            out.append(Check(f"star norm gamma={gamma} vs base ({space})", ok, measured=b))
    return out


def _base_norm(f, prm, space):
    return besov_type_norm(f, prm) if space == "B" else besov_tilde_norm(f, prm)


def check_embeddings(cfg: RunConfig) -> list:
    grid = cfg.grid
    L = grid.box_length
    fields = _corpus(cfg, "embeddings")
    bank, V = cfg.bank, cfg.V
    alpha = cfg.alpha
    q = _expo("2", grid)
    qinf = _expo("inf", grid)
    cos = f"cos(2*pi*x/{L:g})"
    out = []

    # B^{alpha,tau}_{p,q} = B^{alpha + n(1/tau - 1/p)}_{inf,inf} for tau < p
    p4, t2 = _expo(f"4 + 0.5*{cos}", grid), _expo("2", grid)
    prm = BesovParams(alpha, p4, q, t2, bank, V)
    s = alpha.values + grid.dim * (1 / t2.values - 1 / p4.values)
    b, ok = _two_sided(_ratios(fields, lambda f: besov_type_norm(f, prm), lambda f: linfty_smoothness_norm(f, s, bank, V)))
    out.append(Check("tau < p identification with B_inf,inf (two-sided)", ok, measured=b))

    # B^{alpha + n/tau + n/p2 - n/p1}_{p2,q} into B^{alpha,tau}_{p1,q}, p2 <= p1
    p1, p2, tau = _expo(f"4 + 0.5*{cos}", grid), _expo(f"2 + 0.5*{cos}", grid), _expo("4", grid)
    a2 = _values(grid, alpha.values + grid.dim * (1 / tau.values + 1 / p2.values - 1 / p1.values))
    prm = BesovParams(alpha, p1, q, tau, bank, V)
    b, ok = _one_sided(_ratios(fields, lambda f: besov_type_norm(f, prm), lambda f: besov_variable_norm(f, a2, p2, q, bank, V)))
    out.append(Check("Besov into Besov-type with integrability trade", ok, measured=b))

    # B^{alpha,tau}_{p,q} into B^{alpha + n/tau - n/p}_{inf,inf}, also the pointwise block bound
    if cfg.tau is not None:
        prm = _params(cfg)
        s = alpha.values + grid.dim * (1 / cfg.tau.values - 1 / cfg.p.values)
        b, ok = _one_sided(_ratios(fields, lambda f: linfty_smoothness_norm(f, s, bank, V), lambda f: besov_type_norm(f, prm)))
        out.append(Check("Besov-type into B_inf,inf / pointwise block bound", ok, measured=b))

    # B-tilde^{alpha,p}_{p,inf} = B^{alpha}_{inf,inf}
    prm = BesovParams(alpha, cfg.p, qinf, None, bank, V)
    b, ok = _two_sided(_ratios(fields, lambda f: besov_tilde_norm(f, prm), lambda f: linfty_smoothness_norm(f, alpha, bank, V)))
    out.append(Check("B-tilde with q = inf equals B_inf,inf (two-sided)", ok, measured=b))

    # B^{alpha,p}_{p,q} into B-tilde^{alpha,p}_{p,q}
    prm = BesovParams(alpha, cfg.p, q, cfg.p, bank, V)
    b, ok = _one_sided(_ratios(fields, lambda f: besov_tilde_norm(f, prm), lambda f: besov_type_norm(f, prm)))
    out.append(Check("Besov-type with tau = p into B-tilde", ok, measured=b))

    # Sobolev: alpha0 - n/p0 = alpha1 - n/p1 with p0 < p1
    a0 = _values(grid, alpha.values + 0.5)
    a1 = _values(grid, a0.values - grid.dim / 2 + grid.dim / 4)
    prm0 = BesovParams(a0, _expo("2", grid), q, None, bank, V)
    prm1 = BesovParams(a1, _expo("4", grid), q, None, bank, V)
    b, ok = _one_sided(_ratios(fields, lambda f: besov_tilde_norm(f, prm1), lambda f: besov_tilde_norm(f, prm0)))
    out.append(Check("Sobolev embedding of B-tilde spaces", ok, measured=b))

    # Besov-Morrey into Besov-type: exact constant 1 on the dyadic family
    inner, outer = 1.5, 3.0
    tau_m = _values(grid, np.full(grid.shape, 1 / (1 / inner - 1 / outer)), "P0")
    prm = BesovParams(alpha, _expo(repr(inner), grid), q, tau_m, bank, V)
    b, ok = _one_sided(_ratios(fields, lambda f: besov_type_norm(f, prm),
                               lambda f: besov_morrey_norm(f, alpha, outer, 2.0, inner, bank, V)), C=1 + 1e-9)
    out.append(Check("Besov-Morrey into Besov-type (constant 1)", ok, measured=b))
    prm = BesovParams(alpha, _expo(repr(inner), grid), qinf, tau_m, bank, V)
    b, ok = _two_sided(_ratios(fields, lambda f: besov_type_norm(f, prm),
                               lambda f: besov_morrey_norm(f, alpha, outer, np.inf, inner, bank, V)))
    out.append(Check("Besov-Morrey with q = inf equals Besov-type (two-sided)", ok, measured=b))
    return out


# transform suite


def check_calderon(cfg: RunConfig) -> list:
    out = []
    g2 = Grid(2, 2, 6)
    for label, bank in (("bank 1", cfg.bank), ("bank 2", cfg.second_bank), ("2-D", build_filterbank(g2))):
        r = calderon_residual(bank)
        out.append(Check(f"Calderon identity residual ({label})", r <= 1e-12, measured={"residual": r}))
    return out


def check_reconstruction(cfg: RunConfig) -> list:
    worst = 0.0
    for bank in (cfg.bank, cfg.second_bank):
        fields = _corpus(cfg, "reconstruction", band=2.0 ** (bank.max_level - 1))
        for f in fields:
            rec = inverse_phi_transform(phi_transform(f, bank), bank)
            worst = max(worst, float(np.max(np.abs(rec.data - f.data)) / f.sup_norm()))
    g2 = Grid(2, 2, 6)
    bank2 = build_filterbank(g2)
    f2 = band_limited_field(g2, _rng(cfg, "reconstruction-2d"), 2.0 ** (bank2.max_level - 1))
    rec = inverse_phi_transform(phi_transform(f2, bank2), bank2)
    worst2 = float(np.max(np.abs(rec.data - f2.data)) / f2.sup_norm())
    return [
        Check("reconstruction T_psi S_phi f = f", worst <= 1e-6, measured={"max_relative_error": worst}),
        Check("reconstruction in 2-D", worst2 <= 1e-6, measured={"max_relative_error": worst2}),
    ]


def check_transform_bounds(cfg: RunConfig) -> list:
    fields = _corpus(cfg, "transform")
    out = []
    ratios, base = [], {}
    for label, bank in (("bank1", cfg.bank), ("bank2", cfg.second_bank)):
        prm = _params(cfg, bank=bank, top_level=min(cfg.V, bank.max_level))
        for f in fields:
            nf = _base_norm(f, prm, "B" if cfg.tau is not None else "tilde")
            lam = phi_transform(f, bank, prm.V)
            if cfg.tau is not None:
                nl = seq_b_norm(lam, cfg.alpha, cfg.p, cfg.q, cfg.tau)
            else:
                nl = seq_b_tilde_norm(lam, cfg.alpha, cfg.p, cfg.q)
            ratios.append(nl / nf)
            base.setdefault(id(f), []).append(nf)
    b, ok = _two_sided(ratios)
    out.append(Check("phi-transform bounded both ways (two banks)", ok, measured=b))
    agree = [max(x) / min(x) for x in base.values()]
    out.append(Check("Besov norms of two banks agree within 4", max(agree) <= 4.0, measured={"max_factor": max(agree)}))
    return out


def check_lambda_star(cfg: RunConfig) -> list:
    fields = _corpus(cfg, "lambda-star")
    knobs = cfg.data["lambda_star"]
    r = float(knobs["r"])
    tau = cfg.tau
    tilde = tau is None
    th = lambda_star_threshold(cfg.alpha, cfg.p, cfg.q, tau, r, tilde=tilde)
    d = float(knobs["d"]) if knobs["d"] is not None else th["threshold"] + 1.0
    d_low = float(knobs["d_below"])

    def norm(lam):
        if tilde:
            return seq_b_tilde_norm(lam, cfg.alpha, cfg.p, cfg.q)
        return seq_b_norm(lam, cfg.alpha, cfg.p, cfg.q, tau)

    dominated = True
    monotone = True
    above, below = [], []
    for f in fields:
        lam = phi_transform(f, cfg.bank, cfg.V)
        star = lambda_star(lam, r, d)
        star2 = lambda_star(lam, r, d + 1.0)
        for a, s, s2 in zip(lam.levels, star.levels, star2.levels):
            dominated &= bool(np.all(s.real >= np.abs(a)))
            monotone &= bool(np.all(s2.real <= s.real))
        base = norm(lam)
        above.append(norm(star) / base)
        below.append(norm(lambda_star(lam, r, d_low)) / base)
    b = _bracket(above)
    bb = _bracket(below)
    measured = {**b, "d": d, "threshold": th["threshold"], "a": th["a"], "r": r}
    out = [
        Check("lambda* dominates |lambda| entrywise", dominated),
        Check("lambda* decreasing in d", monotone),
    ]
    if d > th["threshold"]:
        ok = b["min"] >= 1 and b["max"] <= EQUIVALENCE_C and b["spread"] <= STABILITY
        out.append(Check("lambda* equivalence above the d threshold", bool(ok), measured=measured))
    else:
        # a configured d at or below the threshold carries no guarantee
        out.append(Check("lambda* bracket at the configured d (below threshold)", True, informational=True,
                         measured={**measured, "growth_vs_d_below": b["max"] / bb["max"]}))
    out.append(Check("lambda* below the d threshold", True, informational=True,
                     measured={**bb, "d": d_low, "growth_vs_configured_d": bb["max"] / b["max"]}))
    return out


def check_coefficient_bound(cfg: RunConfig) -> list:
    fields = _corpus(cfg, "coefficient-bound")
    out = []
    for tilde in (False, True):
        if not tilde and cfg.tau is None:
            continue
        raw, adj, ok = [], [], True
        for f in fields:
            lam = phi_transform(f, cfg.bank, cfg.V)
            rep = coefficient_bound_check(lam, cfg.alpha, cfg.p, cfg.q, cfg.tau, tilde=tilde)
            raw.append(rep["max_ratio"])
            adj.append(rep["max_adjusted_ratio"])
            ok &= rep["passed"]
        label = "b-tilde" if tilde else "b"
        out.append(Check(f"single-coefficient bound ({label})", bool(ok),
                         measured={"max_ratio": max(raw), "max_ratio_over_oscillation_factor": max(adj)}))
    return out


def check_sup_inf(cfg: RunConfig) -> list:
    fields = _corpus(cfg, "sup-inf")
    prm = _params(cfg)
    out = []
    gap = cfg.grid.resolution_exponent - cfg.V
    for gamma in range(1, min(2, gap) + 1):
        sups, infs, ordered = [], [], True
        for f in fields:
            nf = _base_norm(f, prm, "B" if cfg.tau is not None else "tilde")
            s, i = sup_inf_sequences(f, cfg.bank, gamma, cfg.V)
            ordered &= all(bool(np.all(a.real <= b.real)) for a, b in zip(i.levels, s.levels))
            if cfg.tau is not None:
                sups.append(seq_b_norm(s, cfg.alpha, cfg.p, cfg.q, cfg.tau) / nf)
                infs.append(seq_b_norm(i, cfg.alpha, cfg.p, cfg.q, cfg.tau) / nf)
            else:
                sups.append(seq_b_tilde_norm(s, cfg.alpha, cfg.p, cfg.q) / nf)
                infs.append(seq_b_tilde_norm(i, cfg.alpha, cfg.p, cfg.q) / nf)
        bs, oks = _two_sided(sups)
        bi, oki = _two_sided(infs)
        out.append(Check(f"sup/inf sandwich gamma={gamma}", bool(ordered and oks and oki), measured={
            "inf_below_sup": ordered, "sup_over_B": bs, "inf_over_B": bi}))
    return out


# atoms suite


def check_required_KL(cfg: RunConfig) -> list:
    g = Grid(1, 0, 4)

    def c(x, cls="real"):
        return VariableExponent.constant(g, x, cls)

    cases = [
        ("alpha=1, tau=1", required_K_L(c(1), c(2), c(1))[0], 3),
        ("p=2, alpha=1", required_K_L(c(1), c(2), c(1))[1], -1),
        ("p=1/2, alpha=0", required_K_L(c(0), c(0.5), c(1))[1], 1),
    ]
    return [Check(f"(K, L) thresholds: {name}", got == want, measured={"got": got, "expected": want})
            for name, got, want in cases]


def check_atom_closure(cfg: RunConfig) -> list:
    grid = cfg.grid
    rng = _rng(cfg, "atom-closure")
    top = grid.resolution_exponent - 3
    failures, margin, moment = 0, 1.0, 0.0
    for _ in range(50):
        v = int(rng.integers(0, top + 1))
        m = tuple(int(rng.integers(0, 2 ** (grid.box_exponent + v))) for _ in range(grid.dim))
        K, L = int(rng.integers(0, 4)), int(rng.integers(-1, 3))
        rep = validate_atom(make_bump_atoms(grid, v, m, K, L, 3.0, rng))
        failures += not rep.passed
        margin = min(margin, rep.derivative_margin)
        moment = max(moment, rep.moment_max / rep.moment_tol if rep.moment_tol > 0 else 0.0)
    return [Check("bump atoms pass their validator (50 random)", failures == 0, measured={
        "failures": failures, "min_derivative_margin": margin, "max_moment_over_tol": moment})]


FJ_CASES = ((1, 3, -1), (2, 3, 1), (3, 2, 0), (2, 3, 2), (0, 3, -1), (1, 3, 0))


def fj_reports(cfg: RunConfig) -> dict:
    grid = cfg.grid
    out = {}
    for v, K, L in FJ_CASES:
        m = (2 ** (grid.box_exponent + v) // 3,) * grid.dim
        out[(v, K, L)] = verify_fj_decay(make_bump_atoms(grid, v, m, K, L), cfg.bank)
    return out


def check_fj(cfg: RunConfig) -> list:
    reps = fj_reports(cfg)
    fine_frac, coarse_frac, ok = 0.0, 0.0, True
    held = {"fine": 0, "coarse": 0}
    for rep in reps.values():
        ok &= rep["passed"]
        frac = {j: rep["sups"][j] / rep["bounds"][j] for j in rep["sups"] if rep["bounds"][j] > 0}
        fine_frac = max(fine_frac, max(frac.get(j, 0.0) for j in rep["fine_side"]["levels"]))
        coarse_frac = max(coarse_frac, max(frac.get(j, 0.0) for j in rep["coarse_side"]["levels"]))
        held["fine"] += rep["fine_side"]["first_pair_holds"]
        held["coarse"] += rep["coarse_side"]["first_pair_holds"]
    ok = bool(ok) and max(fine_frac, coarse_frac) <= 1 + 1e-9
    n = len(reps)
    return [
        Check("block decay of atoms within explicit envelopes", ok, measured={
            "atoms": n, "max_fraction_of_bound_fine": fine_frac, "max_fraction_of_bound_coarse": coarse_frac}),
        Check("block decay quotients bounded by the first quotient", held["fine"] + held["coarse"] == 2 * n,
              informational=True, measured={"atoms": n, "fine_side_holds": held["fine"], "coarse_side_holds": held["coarse"]}),
    ]


def check_synthesis(cfg: RunConfig) -> list:
    grid = cfg.grid
    rng = _rng(cfg, "synthesis")
    prm = _params(cfg)
    space = "B" if cfg.tau is not None else "tilde"
    K_min, L_min = required_K_L(cfg.alpha, cfg.p, cfg.tau, space)
    K = max(3, K_min)
    families = {"plain": bump_family(K, max(L_min, -1)), "moments": bump_family(K, max(L_min, 1))}
    top = min(4, grid.resolution_exponent - 3, cfg.V)
    seqs = []
    for _ in range(20):
        entries = []
        for _ in range(int(rng.integers(1, 8))):
            v = int(rng.integers(0, top + 1))
            m = tuple(int(rng.integers(0, 2 ** (grid.box_exponent + v))) for _ in range(grid.dim))
            entries.append((v, m, float(rng.standard_normal())))
        seqs.append(CoefficientSequence.from_entries(grid, cfg.V, entries))
    maxima = {}
    for name, fam in families.items():
        ratios = [atomic_synthesis(lam, fam, prm, space)[1]["ratio"] for lam in seqs]
        maxima[name] = max(ratios)
    hi, lo = max(maxima.values()), min(maxima.values())
    ok = np.isfinite(hi) and hi / lo <= 4.0
    return [Check("atomic synthesis bound stable across two families", bool(ok), measured={
        **{f"max_ratio.{k}": v for k, v in maxima.items()}, "factor": hi / lo})]


def check_quasi_atoms(cfg: RunConfig) -> list:
    f = band_limited_field(cfg.grid, _rng(cfg, "quasi-atoms"), 2.0 ** (cfg.V - 1))
    prm = _params(cfg) if cfg.tau is not None else None
    _, rep = quasi_atomic_decomposition(f, cfg.bank, prm)
    ok = rep["residual"] <= 1e-6 and (prm is None or 1 / EQUIVALENCE_C <= rep["ratio"] <= EQUIVALENCE_C)
    measured = {k: v for k, v in rep.items() if k != "kind"}
    return [Check("quasi-atomic decomposition (psi route)", bool(ok), measured=measured)]


SUITES = {
    "kernels": [check_eta_lemmas, check_r_trick, check_hardy, check_majorant, check_level_mixing],
    "norms": [check_unit_ball, check_constant_oracles, check_sharp_star, check_embeddings],
    "transform": [check_calderon, check_reconstruction, check_transform_bounds, check_lambda_star,
                  check_coefficient_bound, check_sup_inf],
    "atoms": [check_required_KL, check_atom_closure, check_fj, check_synthesis, check_quasi_atoms],
}


def run_suite(cfg: RunConfig, suite: str) -> list:
    """Run ``suite`` (or ``"all"``) and return the list of checks."""
    if suite == "all":
        names = list(SUITES)
    elif suite in SUITES:
        names = [suite]
    else:
        raise KeyError(suite)
    results = []
    for name in names:
        for fn in SUITES[name]:
            t0 = time.perf_counter()
            checks = fn(cfg)
            dt = time.perf_counter() - t0
            for c in checks:
                c.wall_time_s = dt / len(checks)
                c.measured = {"suite": name, **c.measured}
            results.extend(checks)
    return results
