"""Smoke test for the delaystab Python extension.

Build and install first:  pip install ./crates/python --no-build-isolation
"""

import math
import pathlib

import delaystab

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "crates" / "cli" / "tests" / "fixtures"


def main():
    example = delaystab.System.from_file(str(FIXTURES / "two_neuron.json"))
    assert example.kind == "two_neuron"
    assert len(example.sha256) == 64

    report = delaystab.analyze(example)
    assert report.stable and report.exit_code == 0, report.summary()
    assert report.criterion == "theorem1"
    assert report.verdict("gopalsamy17")["status"] == "inconclusive"
    assert report.verdict("criterion18")["status"] == "stable_certified"
    assert report.lambda0 > 0
    assert report.to_dict()["input_sha256"] == example.sha256

    doc = example.to_dict()
    doc["L1"] = 5
    assert delaystab.analyze(delaystab.System(doc)).exit_code == 2

    doc["a1"] = 0
    try:
        delaystab.System(doc)
    except delaystab.InputError as e:
        assert "a1" in str(e)
    else:
        raise AssertionError("a1 = 0 accepted")

    cert = delaystab.certify_rate(example)
    assert math.isclose(cert["lambda0"], report.lambda0)

    traj = delaystab.simulate(example, t_end=10.0, step=0.01)
    assert len(traj) == 1001 and traj.times[-1] == 10.0
    fit = traj.fit_decay([0.0, 0.0])
    assert fit["lambda_hat"] > 0
    assert traj.to_csv().startswith("t,x_1,x_2\n")

    bam = delaystab.System.from_file(str(FIXTURES / "leaky_bam.json"))
    eq = delaystab.equilibrium(bam)
    det = 1 - 1 / 144000
    assert math.isclose(eq["solution"]["x_star"][0], (10000 + 20000 / 720) / det, rel_tol=1e-9)
    assert math.isclose(eq["solution"]["y_star"][0], (20000 + 10000 / 200) / det, rel_tol=1e-9)

    rows = delaystab.sweep(bam, "parameters.mu", "0:18:2")
    assert [r["value"] for r in rows] == [2.0 * k for k in range(10)]
    assert all(r["status"] == "stable_certified" for r in rows)

    m = delaystab.is_m_matrix([[0.8, -0.5], [-0.2, 0.5]])
    assert m["is_m_matrix"] and all(x > 0 for x in m["witness_xi"])
    assert not delaystab.is_m_matrix([[1.0, -2.0], [-1.0, 1.0]])["is_m_matrix"]

    print("delaystab", delaystab.__version__, "smoke test passed")


if __name__ == "__main__":
    main()
