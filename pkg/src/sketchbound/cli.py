"""Command-line harness: build artifacts, run experiments, verify the claimed laws.

Subcommands
-----------
codebook            build + audit a greedy codebook, write it to disk
bounds              tabulate deterministic row lower bounds over a grid
recover-experiment  nearest-image decoding under uniform l1 noise
protocol-sim        one-way augmented-indexing reduction trials
verify-lemmas       empirical checks of the tail/concentration laws
discretize-check    fixed-point rounding shadow audit

Every subcommand accepts ``--seed``, ``--config FILE`` (flat key=value), and
``--out DIR``.  With ``--out`` the run writes CSV tables, a resolved config,
a text summary, and (unless ``--no-figures``) PNG figures.  Outputs are byte
identical across runs with the same resolved config and seed.

Exit codes: 0 success, 1 parameter error, 2 usage error, 3 a verification
check failed.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.stats

from . import bounds as bounds_mod
from . import codes, geometry, measurement, protocol, recovery
from .config import ExperimentConfig
from .seeds import derive_rng

EXIT_OK = 0
EXIT_PARAMS = 1
EXIT_USAGE = 2
EXIT_FAILED = 3

TRIAL_COLUMNS = ["trial", "true_index", "decoded_index", "success", "noise_l1", "noise_l2"]
PROTOCOL_COLUMNS = [
    "trial", "bit_index", "chunk_pos", "true_word", "decoded_word", "true_bit",
    "guess", "success", "margin", "margin_bound", "margin_ok", "guarantee_ok",
    "guarantee_ratio", "noise_l1", "noise_l2", "message_bits",
]
CHECK_COLUMNS = ["check", "params", "reference", "observed", "band", "holds"]
SHADOW_COLUMNS = ["instance", "image_gap", "shadow_l1", "bound_row_l1", "bound_dim_l1", "ok"]
BOUNDS_COLUMNS = [
    "n", "k", "C", "q", "gamma", "det_lower_bound", "gv_floor",
    "log2_gv_floor", "collision_threshold",
]


def _write_csv(path: Path, header: list[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(["%d" % v if isinstance(v, (bool, np.bool_)) else v for v in row])


class _Reporter:
    """Collects summary lines; prints them and optionally writes summary.txt."""

    def __init__(self) -> None:
        self.lines: list[str] = []

    def say(self, line: str) -> None:
        self.lines.append(line)
        print(line)

    def flush(self, out_dir: Path | None) -> None:
        if out_dir is not None:
            (out_dir / "summary.txt").write_text("\n".join(self.lines) + "\n", encoding="utf-8")


def _resolve(args: argparse.Namespace, subcommand: str, defaults: dict[str, str],
             overrides: dict[str, object]) -> ExperimentConfig:
    cfg = ExperimentConfig(subcommand, dict(defaults))
    if getattr(args, "config", None):
        file_cfg = ExperimentConfig.from_file(args.config, subcommand)
        cfg = cfg.merged({k: v for k, v in file_cfg.params.items()})
    cfg = cfg.merged({k: (None if v is None else str(v)) for k, v in overrides.items()})
    return cfg


def _prepare_out(args: argparse.Namespace, cfg: ExperimentConfig) -> tuple[Path | None, bool]:
    out_dir = None
    if getattr(args, "out", None):
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        cfg.to_file(out_dir / "config.txt")
    want_figures = out_dir is not None and not getattr(args, "no_figures", False)
    return out_dir, want_figures


# ---------------------------------------------------------------------------
# codebook


def _cmd_codebook(args: argparse.Namespace) -> int:
    defaults = {"q": "16", "k": "4", "eps": "1/2", "seed": "0",
                "budget": "1000000", "pair_check_limit": "10000"}
    cfg = _resolve(args, "codebook", defaults, {
        "q": args.q, "k": args.k, "eps": args.eps, "seed": args.seed,
        "budget": args.budget, "target_size": args.target_size,
        "pair_check_limit": args.pair_check_limit,
    })
    cfg.require_known({"q", "k", "eps", "seed", "budget", "target_size", "pair_check_limit"})
    q = cfg.get_int("q")
    k = cfg.get_int("k")
    eps = cfg.get_fraction("eps")
    seed = cfg.get_int("seed")
    target = cfg.get_int("target_size", 0) or None
    pair_limit = cfg.get_int("pair_check_limit")

    rep = _Reporter()
    out_dir, want_figures = _prepare_out(args, cfg)

    started = time.monotonic()
    code = codes.gv_construct(q, k, eps, seed=seed,
                              rejection_budget=cfg.get_int("budget"), target_size=target)
    elapsed = time.monotonic() - started
    book = codes.expand_to_binary(code)

    floor = code.size_floor()
    rep.say(f"codebook: q={q} k={k} design_distance={code.min_dist} method={code.method}")
    rep.say(f"size={len(code)} log2_size={code.log2_size:.4f} floor={floor} "
            f"build_seconds={elapsed:.2f}")

    verified_min = -1
    failed = False
    if len(code) <= pair_limit:
        verified_min = code.check_min_distance()
        rep.say(f"verified min distance over all pairs: {verified_min}")
        if verified_min < code.min_dist:
            rep.say("FAIL: pairwise distance below the design distance")
            failed = True
    if code.method == "lexicographic":
        if len(code) < floor:
            rep.say(f"FAIL: maximal construction below its size floor {floor}")
            failed = True
        try:
            log2_bound = codes.gv_log2_size_bound(q, k, code.min_dist)
            if code.log2_size <= log2_bound:
                rep.say(f"FAIL: log2 size {code.log2_size:.4f} not above bound {log2_bound:.4f}")
                failed = True
            else:
                rep.say(f"log2 size bound {log2_bound:.4f}: satisfied")
        except ValueError:
            rep.say("log2 size bound undefined at this eps (outside entropy domain)")

    if out_dir is not None:
        codes.save_codebook(book, out_dir / "codebook.txt")
        _write_csv(out_dir / "summary.csv",
                   ["q", "k", "eps", "design_distance", "size", "log2_size", "gv_floor",
                    "method", "verified_min_distance", "build_seconds"],
                   [[q, k, str(eps), code.min_dist, len(code), repr(code.log2_size),
                     floor, code.method, verified_min, f"{elapsed:.3f}"]])
        if want_figures:
            from . import figures
            dists = _pair_distance_sample(code, seed)
            figures.distance_histogram(2 * dists, book.min_dist, out_dir / "distances.png")
    rep.flush(out_dir)
    return EXIT_FAILED if failed else EXIT_OK


def _pair_distance_sample(code: codes.QaryCode, seed: int, cap: int = 1500,
                          sample_pairs: int = 100000) -> np.ndarray:
    words = code.words
    size = len(code)
    if size <= cap:
        out = []
        for i in range(size - 1):
            out.append((words[i + 1:] != words[i]).sum(axis=1))
        return np.concatenate(out)
    rng = derive_rng(seed, 0, "figure")
    left = rng.integers(0, size, sample_pairs)
    right = rng.integers(0, size, sample_pairs)
    keep = left != right
    return (words[left[keep]] != words[right[keep]]).sum(axis=1)


# ---------------------------------------------------------------------------
# bounds


def _cmd_bounds(args: argparse.Namespace) -> int:
    defaults = {"n": "1024", "k": "1", "C": "1"}
    cfg = _resolve(args, "bounds", defaults, {"n": args.n, "k": args.k, "C": args.C})
    cfg.require_known({"n", "k", "C"})
    ns = [int(v) for v in cfg.get_str("n").split(",")]
    ks = [int(v) for v in cfg.get_str("k").split(",")]
    cs = [float(Fraction(v)) for v in cfg.get_str("C").split(",")]

    rep = _Reporter()
    out_dir, want_figures = _prepare_out(args, cfg)
    rows = []
    fig_rows = []
    for n in ns:
        for k in ks:
            for C in cs:
                try:
                    params = bounds_mod.DetBoundParams(n=n, k=k, C=C)
                except ValueError as exc:
                    rep.say(f"skip n={n} k={k} C={C}: {exc}")
                    continue
                bound = bounds_mod.det_lower_bound(params)
                floor = codes.gv_size_floor(params.q, k, max(1, -(-k // 2)))
                thresh = bounds_mod.collision_threshold(floor, params.gamma)
                rows.append([n, k, C, params.q, str(params.gamma), repr(bound),
                             floor, repr(math.log2(floor)), thresh])
                fig_rows.append({"n": n, "k": k, "C": C, "bound": bound})
                rep.say(f"n={n} k={k} C={C}: rows >= {bound:.4f} "
                        f"(codebook floor {floor}, collision below m={thresh})")
    if not rows:
        raise ValueError("no valid (n, k, C) combinations in the requested grid")
    if out_dir is not None:
        _write_csv(out_dir / "bounds.csv", BOUNDS_COLUMNS, rows)
        if want_figures:
            from . import figures
            figures.bounds_curves(fig_rows, out_dir / "bounds.png")
    rep.flush(out_dir)
    return EXIT_OK


# ---------------------------------------------------------------------------
# recover-experiment


def _cmd_recover(args: argparse.Namespace) -> int:
    defaults = {"n": "256", "k": "4", "m": "10", "eps": "1/2", "safety": "1/6",
                "scale": "1", "trials": "500", "seed": "0"}
    cfg = _resolve(args, "recover-experiment", defaults, {
        "n": args.n, "k": args.k, "m": args.m, "eps": args.eps, "safety": args.safety,
        "scale": args.scale, "radius": args.radius, "trials": args.trials,
        "seed": args.seed, "min_rate": args.min_rate,
    })
    cfg.require_known({"n", "k", "m", "eps", "safety", "scale", "radius",
                       "trials", "seed", "min_rate"})
    n = cfg.get_int("n")
    k = cfg.get_int("k")
    m = cfg.get_int("m")
    seed = cfg.get_int("seed")
    if k < 1 or n % k != 0:
        raise ValueError(f"sparsity {k} must divide dimension {n}")

    rep = _Reporter()
    out_dir, want_figures = _prepare_out(args, cfg)

    code = codes.gv_construct(n // k, k, cfg.get_fraction("eps"), seed=seed)
    book = codes.expand_to_binary(code)
    if "radius" in cfg.params:
        s = cfg.get_float("radius")
    else:
        s = recovery.corollary_noise_radius(
            n, k, m, len(book), safety=cfg.get_float("safety")
        ) * cfg.get_float("scale")
    params = recovery.RecoveryExperimentParams(
        n=n, k=k, m=m, s=s, trials=cfg.get_int("trials"), seed=seed, codebook=book
    )
    result = recovery.uniform_noise_experiment(params)
    rep.say(f"recover-experiment: n={n} k={k} m={m} codebook_size={len(book)} "
            f"noise_radius={s:.6f} trials={params.trials}")
    rep.say(f"success_rate={result.success_rate:.4f}")

    if out_dir is not None:
        _write_csv(out_dir / "trials.csv", TRIAL_COLUMNS,
                   [[r.trial, r.true_index, r.decoded_index, r.success,
                     repr(r.noise_l1), repr(r.noise_l2)] for r in result.rows])
        _write_csv(out_dir / "summary.csv",
                   ["n", "k", "m", "codebook_size", "noise_radius", "trials", "seed",
                    "success_rate"],
                   [[n, k, m, len(book), repr(s), params.trials, seed,
                     repr(result.success_rate)]])
        if want_figures:
            from . import figures
            figures.recovery_scatter(
                np.array([r.noise_l2 for r in result.rows]),
                np.array([r.success for r in result.rows]),
                result.success_rate, out_dir / "recovery.png")
    rep.flush(out_dir)
    if "min_rate" in cfg.params and result.success_rate < cfg.get_float("min_rate"):
        print(f"FAIL: success rate below required {cfg.get_float('min_rate')}",
              file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


# ---------------------------------------------------------------------------
# protocol-sim


def _cmd_protocol(args: argparse.Namespace) -> int:
    defaults = {"n": "64", "k": "4", "C": "1", "oracle": "topk",
                "trials": "200", "seed": "0"}
    cfg = _resolve(args, "protocol-sim", defaults, {
        "n": args.n, "k": args.k, "C": args.C, "m": args.m, "bits": args.bits,
        "oracle": args.oracle, "trials": args.trials, "seed": args.seed,
    })
    cfg.require_known({"n", "k", "C", "m", "bits", "oracle", "trials", "seed"})
    n = cfg.get_int("n")
    k = cfg.get_int("k")
    C = cfg.get_float("C")
    seed = cfg.get_int("seed")
    oracle_name = cfg.get_str("oracle")

    rep = _Reporter()
    out_dir, want_figures = _prepare_out(args, cfg)

    pconfig = protocol.make_standard_config(
        n, k, C,
        m=cfg.get_int("m", 0) or None,
        bits_override=cfg.get_int("bits", 0) or None,
        seed=seed,
    )
    if oracle_name == "topk":
        if pconfig.m != pconfig.n:
            raise ValueError("the exact top-k oracle needs a square sketch (m = n)")
        oracle: recovery.RecoveryOracle = recovery.ExactTopKOracle(k=k, C=C)
    elif oracle_name == "nn":
        oracle = recovery.NearestCodewordOracle(pconfig.codebook, C=C)
    elif oracle_name == "zero":
        oracle = recovery.ZeroOracle(k=k, C=C)
    else:
        raise ValueError(f"unknown oracle {oracle_name!r}; pick topk, nn, or zero")

    cert = pconfig.certificate()
    result = protocol.run_protocol_trials(pconfig, oracle, cfg.get_int("trials"), seed)
    rep.say(f"protocol-sim: n={n} k={k} C={C} D={pconfig.D} bits={pconfig.bits} "
            f"m={pconfig.m} chunk_bits={pconfig.chunk_bits} chunks={pconfig.num_chunks} "
            f"codebook_size={len(pconfig.codebook)} oracle={oracle_name}")
    rep.say(f"success_rate={result.success_rate:.4f} over {result.trials} trials; "
            f"margin_violations={result.margin_violations}")
    rep.say(f"mean_message_bits={result.mean_message_bits:.1f} "
            f"min_bits_per_chunk={result.min_bits_per_chunk:.1f} (rows m={pconfig.m})")
    rep.say(f"shadow certificate: l1 <= {float(cert.shadow_l1_bound):.3e} "
            f"< {float(cert.threshold):.3e}: {cert.shadow_ok}; "
            f"smoothing overlap {cert.overlap_value:.12f} > {cert.overlap_target:.12f}: "
            f"{cert.overlap_ok}")

    failed = result.margin_violations > 0 or not cert.ok
    if failed:
        rep.say("FAIL: margin violation under a holding guarantee or a broken certificate")

    if out_dir is not None:
        _write_csv(out_dir / "trials.csv", PROTOCOL_COLUMNS,
                   [[r.trial, r.bit_index, r.chunk_pos, r.true_word, r.decoded_word,
                     r.true_bit, r.guess, r.success, repr(r.margin), repr(r.margin_bound),
                     r.margin_ok, r.guarantee_ok, repr(r.guarantee_ratio),
                     repr(r.noise_l1), repr(r.noise_l2), r.message_bits]
                    for r in result.rows])
        _write_csv(out_dir / "summary.csv",
                   ["n", "k", "C", "D", "bits", "m", "chunk_bits", "num_chunks",
                    "codebook_size", "oracle", "trials", "seed", "success_rate",
                    "margin_violations", "mean_message_bits", "shadow_ok", "overlap_ok"],
                   [[n, k, C, pconfig.D, pconfig.bits, pconfig.m, pconfig.chunk_bits,
                     pconfig.num_chunks, len(pconfig.codebook), oracle_name,
                     result.trials, seed, repr(result.success_rate),
                     result.margin_violations, repr(result.mean_message_bits),
                     cert.shadow_ok, cert.overlap_ok]])
        if want_figures:
            from . import figures
            figures.protocol_margins(
                np.array([r.chunk_pos for r in result.rows]),
                np.array([r.margin for r in result.rows]),
                np.array([r.margin_bound for r in result.rows]),
                out_dir / "margins.png")
    rep.flush(out_dir)
    return EXIT_FAILED if failed else EXIT_OK


# ---------------------------------------------------------------------------
# verify-lemmas


def _cmd_verify(args: argparse.Namespace) -> int:
    defaults = {"samples": "100000", "matrices": "10000", "seed": "0"}
    cfg = _resolve(args, "verify-lemmas", defaults, {
        "samples": args.samples, "matrices": args.matrices, "seed": args.seed,
    })
    cfg.require_known({"samples", "matrices", "seed"})
    samples = cfg.get_int("samples")
    matrices = cfg.get_int("matrices")
    seed = cfg.get_int("seed")

    rep = _Reporter()
    out_dir, want_figures = _prepare_out(args, cfg)
    rows = []
    all_ok = True

    def record(name: str, params: str, reference: float, observed: float,
               band: float, holds: bool) -> None:
        nonlocal all_ok
        all_ok &= holds
        rows.append([name, params, repr(reference), repr(observed), repr(band), holds])
        rep.say(f"{'PASS' if holds else 'FAIL'} {name} [{params}] "
                f"reference={reference:.6g} observed={observed:.6g}")

    # single-coordinate tails, exact law
    for ball_n, thresh in ((2, 0.5), (64, 0.01)):
        ball = geometry.L1Ball(n=ball_n, s=1.0)
        chk = geometry.coord_tail_check(ball, thresh, samples,
                                        derive_rng(seed, ball_n, "coord-tail"))
        record("coord_tail", f"n={ball_n},t={thresh}", chk.expected, chk.empirical,
               3 * chk.sigma, chk.within)

    # l2 deviation bound
    tail = geometry.l2_tail_bound_check(64, 1.0, 3.0, samples,
                                        derive_rng(seed, 0, "l2-tail"))
    record("l2_tail", "n=64,alpha=3", tail.bound, tail.empirical, 3 * tail.sigma,
           tail.holds)

    # sketch norm concentration, both directions
    shrink = measurement.concentration_check(10, 6.0, matrices,
                                             derive_rng(seed, 0, "shrink"))
    record("norm_shrink", "m=10,D=6", shrink.shrink_bound, shrink.shrink_empirical,
           3 * shrink.sigma(shrink.shrink_bound), shrink.shrink_ok)
    blowup = measurement.concentration_check(10, 3.0, matrices,
                                             derive_rng(seed, 0, "blowup"))
    record("norm_blowup", "m=10,D=3", blowup.blowup_bound, blowup.blowup_empirical,
           3 * blowup.sigma(blowup.blowup_bound), blowup.blowup_ok)

    # ball volume vs entropy, exact arithmetic over the full small grid
    checked = 0
    worst = math.inf
    for q in range(2, 17):
        for k in range(1, 21):
            for d in range(1, k + 1):
                eps = Fraction(d, k)
                if not eps < 1 - Fraction(1, q):
                    continue
                claim = codes.entropy_claim_check(q, k, eps)
                checked += 1
                worst = min(worst, claim.rhs / max(claim.lhs, 1))
                if not claim.holds:
                    record("entropy_claim", f"q={q},k={k},eps={eps}",
                           claim.rhs, float(claim.lhs), 0.0, False)
    record("entropy_claim", f"grid q<=16,k<=20 ({checked} cases)",
           1.0, worst, 0.0, worst > 1.0)

    # smoothing overlap strictly above target for every power of two
    min_gap = math.inf
    for t in range(1, 21):
        lhs, rhs = protocol.smoothing_overlap_margin(2**t)
        min_gap = min(min_gap, lhs - rhs)
    record("smoothing_overlap", "n=2^1..2^20", 0.0, min_gap, 0.0, min_gap > 0.0)

    # derived streams behave independently
    pairs = 10000
    first_a = np.array([derive_rng(seed, t, "matrix").standard_normal()
                        for t in range(pairs)])
    first_b = np.array([derive_rng(seed, t, "noise").standard_normal()
                        for t in range(pairs)])
    qa = np.quantile(first_a, [0.25, 0.5, 0.75])
    qb = np.quantile(first_b, [0.25, 0.5, 0.75])
    table = np.zeros((4, 4), dtype=np.int64)
    ia = np.digitize(first_a, qa)
    ib = np.digitize(first_b, qb)
    for a_bin, b_bin in zip(ia, ib):
        table[a_bin, b_bin] += 1
    chi2 = scipy.stats.chi2_contingency(table)
    record("stream_independence", f"pairs={pairs}", 1e-3, float(chi2.pvalue), 0.0,
           bool(chi2.pvalue > 1e-3))

    if out_dir is not None:
        _write_csv(out_dir / "checks.csv", CHECK_COLUMNS, rows)
        if want_figures:
            from . import figures
            fig_rng = derive_rng(seed, 0, "figure")
            ball = geometry.L1Ball(n=64, s=1.0)
            draws = geometry.sample_l1_ball_batch(ball, 20000, fig_rng)
            l2 = np.sqrt(np.einsum("ij,ij->i", draws, draws))
            mats = fig_rng.standard_normal((4000, 10, 32)) / math.sqrt(10)
            image_norms = np.linalg.norm(mats[:, :, 0], axis=1)
            figures.tail_panels(l2, geometry.l2_tail_threshold(64, 1.0, 3.0),
                                image_norms, 6.0, 3.0, out_dir / "tails.png")
    rep.flush(out_dir)
    return EXIT_OK if all_ok else EXIT_FAILED


# ---------------------------------------------------------------------------
# discretize-check


def _cmd_discretize(args: argparse.Namespace) -> int:
    defaults = {"m": "20", "n": "100", "bits": "16", "instances": "100", "seed": "0"}
    cfg = _resolve(args, "discretize-check", defaults, {
        "m": args.m, "n": args.n, "bits": args.bits, "instances": args.instances,
        "seed": args.seed,
    })
    cfg.require_known({"m", "n", "bits", "instances", "seed"})
    m = cfg.get_int("m")
    n = cfg.get_int("n")
    bits = cfg.get_int("bits")
    instances = cfg.get_int("instances")
    seed = cfg.get_int("seed")
    if instances < 1:
        raise ValueError(f"need instances >= 1, got {instances}")

    rep = _Reporter()
    out_dir, want_figures = _prepare_out(args, cfg)
    rows = []
    worst_gap = 0.0
    violations = 0
    for i in range(instances):
        chk = measurement.discretization_shadow_check(
            m, n, bits, derive_rng(seed, i, "discretize"))
        worst_gap = max(worst_gap, chk.image_gap)
        violations += not chk.ok
        rows.append([i, repr(chk.image_gap), repr(chk.shadow_l1),
                     repr(chk.bound_row_l1), repr(chk.bound_dim_l1), chk.ok])
    rep.say(f"discretize-check: m={m} n={n} bits={bits} instances={instances}")
    rep.say(f"worst image gap {worst_gap:.3e}; violations {violations}")

    if out_dir is not None:
        _write_csv(out_dir / "instances.csv", SHADOW_COLUMNS, rows)
        if want_figures:
            from . import figures
            figures.shadow_sizes(np.array([float(r[2]) for r in rows]),
                                 float(rows[0][4]), out_dir / "shadows.png")
    rep.flush(out_dir)
    return EXIT_FAILED if violations else EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--seed", type=int, default=None, help="root seed (default 0)")
    sub.add_argument("--config", type=str, default=None,
                     help="key=value config file; CLI flags override it")
    sub.add_argument("--out", type=str, default=None,
                     help="directory for CSV tables, figures, and the resolved config")
    sub.add_argument("--no-figures", action="store_true",
                     help="skip PNG rendering even when --out is given")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sketchbound",
        description="sparse-recovery sketching bounds: constructions and verification",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("codebook", help="build and audit a greedy codebook")
    p.add_argument("--q", type=int, default=None, help="alphabet size")
    p.add_argument("--k", type=int, default=None, help="block length")
    p.add_argument("--eps", type=str, default=None, help="relative distance, e.g. 1/2")
    p.add_argument("--budget", type=int, default=None, help="rejection budget (random path)")
    p.add_argument("--target-size", dest="target_size", type=int, default=None,
                   help="stop the random path at this size")
    p.add_argument("--pair-check-limit", dest="pair_check_limit", type=int, default=None,
                   help="verify all pairwise distances up to this size")
    _add_common(p)
    p.set_defaults(handler=_cmd_codebook)

    p = subs.add_parser("bounds", help="deterministic lower-bound table")
    p.add_argument("--n", type=str, default=None, help="comma list of dimensions")
    p.add_argument("--k", type=str, default=None, help="comma list of sparsities")
    p.add_argument("--C", type=str, default=None, help="comma list of factors")
    _add_common(p)
    p.set_defaults(handler=_cmd_bounds)

    p = subs.add_parser("recover-experiment", help="noisy nearest-image decoding")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--m", type=int, default=None, help="sketch rows")
    p.add_argument("--eps", type=str, default=None, help="codebook relative distance")
    p.add_argument("--safety", type=str, default=None, help="radius safety factor")
    p.add_argument("--scale", type=str, default=None, help="noise radius multiplier")
    p.add_argument("--radius", type=str, default=None, help="explicit noise radius")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--min-rate", dest="min_rate", type=str, default=None,
                   help="exit 3 if the success rate falls below this")
    _add_common(p)
    p.set_defaults(handler=_cmd_recover)

    p = subs.add_parser("protocol-sim", help="augmented-indexing reduction trials")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--C", type=str, default=None)
    p.add_argument("--m", type=int, default=None, help="sketch rows (default n)")
    p.add_argument("--bits", type=int, default=None, help="fixed-point width override")
    p.add_argument("--oracle", type=str, default=None, choices=["topk", "nn", "zero"])
    p.add_argument("--trials", type=int, default=None)
    _add_common(p)
    p.set_defaults(handler=_cmd_protocol)

    p = subs.add_parser("verify-lemmas", help="empirical checks of the probability laws")
    p.add_argument("--samples", type=int, default=None, help="ball samples per check")
    p.add_argument("--matrices", type=int, default=None, help="matrices per concentration check")
    _add_common(p)
    p.set_defaults(handler=_cmd_verify)

    p = subs.add_parser("discretize-check", help="fixed-point shadow audit")
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--bits", type=int, default=None)
    p.add_argument("--instances", type=int, default=None)
    _add_common(p)
    p.set_defaults(handler=_cmd_discretize)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMS


if __name__ == "__main__":
    sys.exit(main())
