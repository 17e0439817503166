#!/usr/bin/env python3
"""Smoke test for the spmkit_py extension module.

Build the extension first:

    cargo build --release -p spmkit-py

then run:

    python3 python/smoke_test.py
"""
import math
import os
import shutil
import sys
import tempfile


def import_extension():
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    candidates = [
        os.path.join(root, "target", "release", "libspmkit_py.so"),
        os.path.join(root, "target", "debug", "libspmkit_py.so"),
        os.path.join(root, "target", "release", "libspmkit_py.dylib"),
        os.path.join(root, "target", "debug", "libspmkit_py.dylib"),
    ]
    lib = next((c for c in candidates if os.path.exists(c)), None)
    if lib is None:
        sys.exit("extension not built; run: cargo build --release -p spmkit-py")
    stage = tempfile.mkdtemp(prefix="spmkit_py_")
    shutil.copy(lib, os.path.join(stage, "spmkit_py.so"))
    sys.path.insert(0, stage)
    import spmkit_py

    return spmkit_py


def check(name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"{status} {name} {detail}")
    if not ok:
        sys.exit(1)


def main():
    m = import_extension()

    # quaternion algebra
    q = m.Quaternion.from_axis_angle((0.0, 0.0, 1.0), math.pi / 2)
    phi, psi, theta = q.to_euler()
    check("euler of 90deg yaw", abs(phi - math.pi / 2) < 1e-12 and abs(psi) < 1e-12)
    rel = m.relative_rotation(q, q)
    check("relative rotation of equal frames", rel.angle_to(m.Quaternion.identity()) < 1e-12)

    # closed-form IK / FK round trip
    t1, t2 = 0.31, -0.42
    (n, pose) = m.forward_kinematics_ideal(t1, t2)
    b1, b2 = m.inverse_kinematics(n)
    check("fk/ik round trip", abs(b1 - t1) < 1e-9 and abs(b2 - t2) < 1e-9, f"({b1:.6f}, {b2:.6f})")
    nx, ny, nz = pose.rotate((0.0, 0.0, 1.0))
    check("pose pointer matches normal", abs(nx - n[0]) + abs(ny - n[1]) + abs(nz - n[2]) < 1e-9)

    # numerical loop closure agrees with the analytic chart on nominal twists
    joints, pose_num = m.solve_passive(t1, t2)
    check("loop closure matches analytic fk", pose_num.angle_to(pose) < 1e-7)
    jac = m.inverse_jacobian(joints)
    check("jacobian shape", len(jac) == 3 and len(jac[0]) == 3)

    # plant + dataset + training + tracking, desk-scale
    ds = m.Dataset.generate(ideal=True, duration_s=8.0, rate_hz=60.0, seed=11, n_profiles=2)
    train_n, test_n = ds.counts()
    check("dataset split", len(ds) == train_n + test_n and test_n > 0, f"n={len(ds)}")

    model = m.IkModel.train(ds, hidden_units=64, max_iterations=600, step_size=3e-3, seed=3)
    mae1, mae2, n_eval = model.evaluate(ds)
    check("ideal-plant identification", mae1 < 0.5 and mae2 < 0.5, f"mae=({mae1:.3f}, {mae2:.3f}) deg")

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "model.txt")
        model.save(path)
        back = m.IkModel.load(path)
        p0 = model.predict(pose)
        p1 = back.predict(pose)
        check("model io round trip", p0 == p1)

    phi, psi, theta, hz = m.track_sweep(model, ideal=True, duration_s=5.0, rate_hz=100.0)
    check("open-loop tracking", max(phi, psi, theta) < 1.0, f"mae=({phi:.3f}, {psi:.3f}, {theta:.3f}) deg @ {hz:.0f} Hz")

    a = m.track_sweep_analytic(ideal=True, duration_s=5.0, rate_hz=100.0)
    check("analytic tracking on ideal plant is exact", max(a[:3]) < 1e-6)

    print("all smoke tests passed")


if __name__ == "__main__":
    main()
