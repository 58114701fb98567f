"""Smoke tests for the seqcal Python module.

Run via ctest (which sets PYTHONPATH to the built module directory) or by
hand: PYTHONPATH=build/bindings python3 tests/python/test_smoke.py
"""
import math
import sys

import seqcal


def test_problem_roundtrip():
    problem = seqcal.make_problem("sphere")
    assert problem.name == "sphere"
    assert problem.y == 0.0
    assert problem.noise_var == 10.0
    assert problem.space.lower == [-5.0, -5.0]
    assert problem.space.upper == [5.0, 5.0]
    assert problem.space.dim() == 2
    assert problem.evaluate([1.0, 2.0]) == 5.0
    assert math.isclose(problem.prior_density([0.0, 0.0]), 1.0 / 100.0, rel_tol=1e-12)
    assert problem.prior_density([6.0, 0.0]) == 0.0
    assert "sphere" in seqcal.testbed_names()


def test_initial_design_deterministic():
    problem = seqcal.make_problem("himmelblau")
    a = seqcal.initial_design(problem, 6, seed=42)
    b = seqcal.initial_design(problem, 6, seed=42)
    c = seqcal.initial_design(problem, 6, seed=43)
    assert len(a) == 6
    assert [(s.theta, s.output) for s in a] == [(s.theta, s.output) for s in b]
    assert [s.theta for s in a] != [s.theta for s in c]
    for s in a:
        assert len(s.theta) == 2
        assert all(-5.0 <= t <= 5.0 for t in s.theta)
        assert math.isfinite(s.output)


def test_gp_fit_and_predict():
    problem = seqcal.make_problem("matyas")
    data = seqcal.initial_design(problem, 8, seed=7)
    cfg = seqcal.FitConfig()
    cfg.multistarts = 2
    cfg.max_iter = 60
    cfg.seed = 3
    gp = seqcal.GpPosterior.fit(data, cfg)
    assert len(gp) == 8

    # The posterior tracks its own training set closely.
    for s in data:
        pred = gp.predict(s.theta)
        assert abs(pred.mean - s.output) < 0.5
        assert pred.var >= 0.0

    pred = gp.predict([0.3, -0.4])
    assert math.isfinite(pred.mean) and pred.var >= 0.0
    cov = gp.posterior_cov([0.3, -0.4], [0.3, -0.4])
    assert math.isclose(cov, pred.var, rel_tol=1e-9, abs_tol=1e-12)
    assert gp.params().scale > 0.0
    assert gp.params().nugget > 0.0


def test_acquisition_values():
    problem = seqcal.make_problem("sphere")
    data = seqcal.initial_design(problem, 8, seed=9)
    cfg = seqcal.FitConfig()
    cfg.multistarts = 2
    cfg.seed = 5
    gp = seqcal.GpPosterior.fit(data, cfg)

    theta = [1.0, -1.0]
    small = seqcal.prob_improvement(gp, problem, theta, 0.1)
    large = seqcal.prob_improvement(gp, problem, theta, 10.0)
    assert 0.0 <= small <= large <= 1.0
    assert seqcal.prob_improvement(gp, problem, theta, 0.0) == 0.0

    tight = seqcal.expected_unimprovement(gp, problem, theta, 0.1)
    loose = seqcal.expected_unimprovement(gp, problem, theta, 10.0)
    assert 0.0 <= loose <= tight

    score = seqcal.eivar(gp, problem, theta, [[0.0, 0.0], [2.0, 2.0]])
    assert score >= 0.0

    loss = seqcal.best_loss(problem, data)
    assert math.isfinite(loss) and loss >= 0.0


def test_design_run_and_trace():
    problem = seqcal.make_problem("sphere")
    cfg = seqcal.EngineConfig()
    cfg.n = 6
    cfg.n0 = 4
    cfg.b = 1
    cfg.w = 1
    cfg.spec.kind = seqcal.AcqKind.HYBRID
    cfg.spec.candidate_count = 20
    cfg.spec.reference_count = 10
    cfg.compute_mad = False
    cfg.clock = seqcal.ClockMode.VIRTUAL
    cfg.replicate_id = 2
    cfg.fit_multistarts = 1
    cfg.fit_max_iter = 40
    trace = seqcal.run_design(problem, cfg)

    assert trace.complete is True
    assert trace.problem == "sphere"
    assert len(trace.jobs) == 4 + 6
    assert len(trace.stages) == 6
    deltas = [s.delta_t for s in trace.stages]
    assert all(d2 <= d1 for d1, d2 in zip(deltas, deltas[1:]))
    assert trace.stages[-1].n_t == 6
    assert math.isnan(trace.stages[0].mad_t)

    again = seqcal.run_design(problem, cfg)
    assert [(j.job_id, j.theta, j.output) for j in again.jobs] == \
           [(j.job_id, j.theta, j.output) for j in trace.jobs]

    series = seqcal.delta_series(trace)
    assert series.points, "delta series should not be empty"
    assert series.points[-1].y == deltas[-1]


def test_perf_simulate():
    sc = seqcal.PerfScenario()
    sc.b = 2
    sc.w = 4
    sc.curve.total = 40
    sc.curve.exponent = 0.5
    sc.stop_count = seqcal.evals_to_accuracy(sc.curve, 0.5)
    sc.acq_model.a = 0.25
    sc.acq_model.tail_constant = 0.0
    sc.run_model.mean = 1.0
    sc.validate()
    trace = seqcal.simulate(sc, omega=1)

    assert trace.final_count >= sc.stop_count
    assert all(size == 4 for size in trace.pending_sizes)
    ends = trace.stage_end
    assert all(b2 > b1 for b1, b2 in zip(ends, ends[1:]))
    assert seqcal.makespan(trace) >= ends[-1]

    curve = seqcal.ProgressCurve()
    curve.total = 1280
    curve.exponent = 0.1
    assert seqcal.evals_to_accuracy(curve, 0.1) == 447


def main():
    tests = [(name, fn) for name, fn in sorted(globals().items())
             if name.startswith("test_") and callable(fn)]
    failures = 0
    for name, fn in tests:
        try:
            fn()
            print(f"ok {name}")
        except Exception as exc:  # noqa: BLE001 - report and continue
            failures += 1
            print(f"FAIL {name}: {exc!r}")
    if failures:
        sys.exit(1)


if __name__ == "__main__":
    main()
