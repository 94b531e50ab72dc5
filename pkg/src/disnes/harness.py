"""Experiment harness: the main induction run, the Fisher ablation sweep,
verification checks, and their file outputs.

Every run writes, into its output directory: a per-iteration CSV log, the
rendered greedy-decoded program, a JSON parameter snapshot, and a
``config.txt`` echo of the fully-resolved configuration.  A ``summary.csv``
collects one row per run in deterministic (arm, lr, seed) order.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace

import numpy as np

from . import estimator as est
from .distributions import (
    BernoulliParams, CategoricalParams, GaussianParams, LOGITS, PROBS,
)
from .optimizer import TrainConfig, greedy_decode, train
from .sketch import Specification, SketchProblem, parse, render

MAIN_SKETCH = """\
fn prog_sketch(x: f32) -> f32
{
  if x [COND] [REAL]
  {
    return [REAL] [OP] x;
  }

  return x [OP] [REAL];
}
"""

TRUE_PROGRAM = """\
fn prog_true(x: f32) -> f32
{
  if x > 3.5
  {
    return 4.2 * x;
  }

  return x * 2.1;
}
"""

MAIN_SPEC = Specification(
    inputs=np.array([[1.0], [2.0], [4.0], [5.0]], dtype=np.float32),
    outputs=np.array([2.1, 4.2, 16.8, 21.0], dtype=np.float32),
)

# Two-input sweep task: same if/else shape, one comparison of an expression
# of both inputs against a constant, one operator and one constant per
# return expression.
ABLATION_SKETCH = """\
fn prog_sketch2(x: f32, y: f32) -> f32
{
  if x - y [COND] [REAL]
  {
    return x [OP] [REAL];
  }

  return y [OP] [REAL];
}
"""

ABLATION_SPEC = Specification(
    inputs=np.array([[5.8, 2.5], [5.0, 6.2], [7.4, 6.1], [5.5, 9.4]],
                    dtype=np.float32),
    outputs=np.array([14.1, -4.677419, 20.9, -5.287234], dtype=np.float32),
)

ABLATION_LEARNING_RATES = (0.1, 0.05, 0.01, 0.005, 0.001)

# arm name -> estimator kind for the discrete holes
ARM_KINDS = {"nes": est.NATURAL, "sg": est.SEARCH, "vo": est.VO}
MAIN_ARMS = ("nes", "vo")
ABLATION_ARMS = ("nes", "sg")

DEFAULT_SEEDS = (1, 2, 3, 4, 5)


@dataclass
class RunResult:
    experiment: str
    arm: str
    learning_rate: float
    seed: int
    final_loss: float          # greedy-decode MSE
    final_outputs: np.ndarray  # f32 outputs of the decoded program
    program_text: str
    csv_path: str
    params_path: str


def params_to_json(params_set, hole_ids):
    holes = []
    for hid, p in zip(hole_ids, params_set):
        if isinstance(p, BernoulliParams):
            holes.append({"id": hid, "family": "bernoulli", "theta": p.theta})
        elif isinstance(p, CategoricalParams):
            holes.append({"id": hid, "family": "categorical", "mode": p.mode,
                          "values": [float(v) for v in p.values]})
        else:
            holes.append({"id": hid, "family": "gaussian", "mu": p.mu,
                          "log_sigma": p.log_sigma})
    return json.dumps({"holes": holes}, indent=2) + "\n"


def params_from_json(text):
    data = json.loads(text)
    hole_ids, params = [], []
    for h in data["holes"]:
        hole_ids.append(h["id"])
        if h["family"] == "bernoulli":
            params.append(BernoulliParams(h["theta"]))
        elif h["family"] == "categorical":
            params.append(CategoricalParams(np.array(h["values"]), mode=h["mode"]))
        elif h["family"] == "gaussian":
            params.append(GaussianParams(h["mu"], h["log_sigma"]))
        else:
            raise ValueError(f"unknown family {h['family']!r}")
    return hole_ids, params


def run_single(experiment, arm, sketch_text, spec, config, out_dir):
    """Train one (arm, lr, seed) cell and persist its artifacts."""
    program = parse(sketch_text)
    problem = SketchProblem(program, spec)
    config = replace(config, estimator_kind=ARM_KINDS[arm])
    log, params = train(problem, config)

    decoded = greedy_decode(params)
    assignment = dict(zip(problem.hole_ids(), decoded))
    final_loss = problem.fitness.mse(decoded)
    outputs = problem.fitness.predicted_outputs(decoded)
    program_text = render(program, assignment)

    stem = f"{arm}_lr{config.learning_rate:g}_seed{config.seed}"
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, stem + ".csv")
    log.write_csv(csv_path)
    prog_path = os.path.join(out_dir, stem + "_program.txt")
    with open(prog_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(program_text)
    params_path = os.path.join(out_dir, stem + "_params.json")
    with open(params_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(params_to_json(params, problem.hole_ids()))

    return RunResult(experiment, arm, config.learning_rate, config.seed,
                     final_loss, outputs, program_text, csv_path, params_path)


def _write_config_echo(out_dir, entries):
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "config.txt"), "w", encoding="utf-8",
              newline="\n") as fh:
        for key, value in entries:
            fh.write(f"{key}={value}\n")


def run_main(seed, out_dir, config=None, sketch_text=None, spec=None,
             arms=MAIN_ARMS):
    """Both arms of the single-input induction experiment for one seed."""
    config = config or TrainConfig(seed=seed)
    config = replace(config, seed=seed)
    sketch_text = sketch_text or MAIN_SKETCH
    spec = spec or MAIN_SPEC
    _write_config_echo(out_dir, [
        ("experiment", "main"),
        ("arms", ",".join(arms)),
        ("lr", repr(config.learning_rate)),
        ("iters", config.iterations),
        ("lambda", config.population),
        ("seed", seed),
        ("log_every", config.log_every),
        ("continuous_kind", config.continuous_kind),
        ("out", out_dir),
    ])
    return [run_single("main", arm, sketch_text, spec, config, out_dir)
            for arm in arms]


def run_ablation(seeds, out_dir, config=None, sketch_text=None, spec=None,
                 learning_rates=ABLATION_LEARNING_RATES, arms=ABLATION_ARMS):
    """Learning-rate sweep comparing explicit-Fisher vs plain score arms."""
    config = config or TrainConfig()
    sketch_text = sketch_text or ABLATION_SKETCH
    spec = spec or ABLATION_SPEC
    _write_config_echo(out_dir, [
        ("experiment", "ablation"),
        ("arms", ",".join(arms)),
        ("lrs", ",".join(repr(lr) for lr in learning_rates)),
        ("iters", config.iterations),
        ("lambda", config.population),
        ("seeds", ",".join(str(s) for s in seeds)),
        ("log_every", config.log_every),
        ("continuous_kind", config.continuous_kind),
        ("out", out_dir),
    ])
    results = []
    for arm in arms:
        for lr in learning_rates:
            for seed in seeds:
                cell = replace(config, learning_rate=lr, seed=seed)
                results.append(run_single("ablation", arm, sketch_text, spec,
                                          cell, out_dir))
    return results


def emit_summary(results, path):
    """Summary CSV, one row per run, ordered by (arm, lr, seed)."""
    if not results:
        raise ValueError("no results to summarize")
    n_out = len(results[0].final_outputs)
    header = ["experiment", "arm", "lr", "seed", "final_loss"]
    header += [f"output_{i}" for i in range(n_out)]
    header.append("program_path")
    rows = sorted(results, key=lambda r: (r.arm, r.learning_rate, r.seed))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for r in rows:
            cells = [r.experiment, r.arm, repr(r.learning_rate), str(r.seed),
                     repr(r.final_loss)]
            cells += [repr(float(v)) for v in r.final_outputs]
            cells.append(os.path.basename(r.csv_path).replace(
                ".csv", "_program.txt"))
            fh.write(",".join(cells) + "\n")
    return path


# --- Verification checks ----------------------------------------------------

@dataclass
class Check:
    name: str
    passed: bool
    detail: str


def _check(name, passed, detail=""):
    return Check(name, bool(passed), detail)


def verify(samples=100_000, cases=1000, oracle_estimates=200, seed=0,
           fim_fn=None):
    """Monte Carlo and algebraic checks on the distribution and estimator
    layers.  Returns a list of :class:`Check`; ``fim_fn`` lets tests inject
    a faulty Fisher computation to confirm the consistency check trips.
    """
    rng = np.random.default_rng(seed)
    checks = []
    fim_fn = fim_fn or (lambda p: p.fim())

    # score zero-mean per family (LOGITS categorical; the per-coordinate
    # PROBS partials intentionally ignore the simplex constraint and are
    # not zero-mean)
    families = [
        ("bernoulli", BernoulliParams(0.3)),
        ("categorical", CategoricalParams(np.log([0.2, 0.3, 0.5]), mode=LOGITS)),
        ("gaussian", GaussianParams(0.7, -0.2)),
    ]
    for name, p in families:
        xs = p.sample(rng, size=samples)
        scores = p.score(xs)
        mean = scores.mean(axis=0)
        se = scores.std(axis=0, ddof=1) / np.sqrt(samples)
        ok = np.all(np.abs(mean) <= 3.0 * se + 1e-12)
        checks.append(_check(
            f"score-zero-mean/{name}", ok,
            f"mean={mean}, 3se={3 * se}"))

    # Fisher consistency: E[score score^T] diagonal vs closed form
    for name, p in [
        ("bernoulli", BernoulliParams(0.35)),
        ("categorical", CategoricalParams(np.array([0.2, 0.3, 0.5]), mode=PROBS)),
    ]:
        xs = p.sample(rng, size=samples)
        sq = np.atleast_2d(p.score(xs)) ** 2
        mean = sq.mean(axis=0)
        se = sq.std(axis=0, ddof=1) / np.sqrt(samples)
        expected = fim_fn(p)
        ok = np.all(np.abs(mean - expected) <= 3.0 * se)
        checks.append(_check(
            f"fim-consistency/{name}", ok,
            f"observed={mean}, expected={expected}, 3se={3 * se}"))

    # algebraic identities over random cases
    ok = True
    for _ in range(cases):
        theta = rng.uniform(0.05, 0.95)
        x = rng.integers(0, 2)
        p = BernoulliParams(theta)
        lhs = p.natural_score(x) * p.fim()
        if not np.allclose(lhs, p.score(x), rtol=1e-12, atol=1e-12):
            ok = False
            break
    checks.append(_check("identity/bernoulli-natural-times-fim", ok))

    ok = True
    for _ in range(cases):
        probs = rng.dirichlet(np.ones(rng.integers(2, 7)))
        probs = np.clip(probs, 1e-3, None)
        probs = probs / probs.sum()
        x = rng.integers(0, probs.size)
        prob_p = CategoricalParams(probs, mode=PROBS)
        logit_p = CategoricalParams(np.log(probs), mode=LOGITS)
        lhs = prob_p.natural_score(x)
        rhs = prob_p.inverse_fim() * logit_p.score(x)
        if not np.allclose(lhs, rhs, rtol=1e-10, atol=1e-12):
            ok = False
            break
    checks.append(_check("identity/categorical-natural-eq-invfim-score", ok))

    ok = True
    for _ in range(cases):
        probs = rng.dirichlet(np.ones(3))
        probs = np.clip(probs, 1e-3, None)
        probs = probs / probs.sum()
        x = rng.integers(0, 3)
        p = CategoricalParams(np.log(probs), mode=LOGITS)
        if not np.allclose(p.prob_gradient(x), probs[x] * p.score(x),
                           rtol=1e-12, atol=1e-15):
            ok = False
            break
    checks.append(_check("identity/vo-term-eq-prob-times-score", ok))

    # estimator vs enumeration oracle (4 standard errors on the mean of
    # repeated estimates)
    params_set = [
        BernoulliParams(0.4),
        CategoricalParams(np.log([0.25, 0.35, 0.4]), mode=LOGITS),
    ]

    def fitness(xs):
        return 1.0 + 2.0 * xs[0] + 0.5 * xs[1] - 0.3 * xs[1] ** 2

    lam = 500
    for kind in est.KINDS:
        exact = est.exact_gradient_oracle(params_set, fitness, kind)
        reps = [est.estimate_gradient(params_set, fitness, lam, rng, kind)
                for _ in range(oracle_estimates)]
        ok = True
        detail = ""
        for i in range(len(params_set)):
            stack = np.stack([r.gradients[i] for r in reps])
            mean = stack.mean(axis=0)
            se = stack.std(axis=0, ddof=1) / np.sqrt(oracle_estimates)
            if not np.all(np.abs(mean - exact[i]) <= 4.0 * se + 1e-12):
                ok = False
                detail = f"hole {i}: mean={mean}, exact={exact[i]}, 4se={4 * se}"
                break
        checks.append(_check(f"estimator-vs-oracle/{kind}", ok, detail))

    # categorical K=2 reduces to Bernoulli under p = [1-theta, theta] with
    # success mapped to category 1: the logit-score search gradient's
    # success coordinate equals the Bernoulli natural gradient Cov(f, x),
    # and the explicit-Fisher gradient carries an extra diag(p)
    theta = 0.3
    bern = BernoulliParams(theta)
    cat_logits = CategoricalParams(np.log([1 - theta, theta]), mode=LOGITS)
    cat_probs = CategoricalParams(np.array([1 - theta, theta]), mode=PROBS)

    def f1(xs):
        return 0.25 + 2.0 * float(xs[0])

    gb_nat = est.exact_gradient_oracle([bern], f1, est.NATURAL)[0][0]
    gs = est.exact_gradient_oracle([cat_logits], f1, est.SEARCH)[0]
    gn = est.exact_gradient_oracle([cat_probs], f1, est.NATURAL)[0]
    ok = (np.allclose(gs[1], gb_nat, rtol=1e-12)
          and np.allclose(gs[0], -gb_nat, rtol=1e-12)
          and np.allclose(gn[1], theta * gb_nat, rtol=1e-12)
          and np.allclose(gn[0], -(1 - theta) * gb_nat, rtol=1e-12))
    checks.append(_check(
        "equivalence/categorical-k2-vs-bernoulli", ok,
        f"bernoulli natural={gb_nat}, logit search={gs}, explicit-fim={gn}"))

    return checks


def format_report(checks):
    lines = []
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        line = f"[{status}] {c.name}"
        if c.detail and not c.passed:
            line += f"  ({c.detail})"
        lines.append(line)
    n_fail = sum(not c.passed for c in checks)
    lines.append(f"{len(checks) - n_fail}/{len(checks)} checks passed")
    return "\n".join(lines)
