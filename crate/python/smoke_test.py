"""Builds the extension module and exercises it once.

    python3 python/smoke_test.py
"""

import importlib
import pathlib
import shutil
import subprocess
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent
HERE = pathlib.Path(__file__).resolve().parent


def build():
    subprocess.run(
        ["cargo", "build", "--release", "-p", "vnsclust-python", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    lib = ROOT / "target" / "release" / "libvnsclust_py.so"
    shutil.copy(lib, HERE / "vnsclust_py.so")


def main():
    if "--no-build" not in sys.argv:
        build()
    sys.path.insert(0, str(HERE))
    vc = importlib.import_module("vnsclust_py")

    x = vc.generate_mixture("x1", seed=0)
    assert len(x) == 6000 and len(x[0]) == 2

    trapped = vc.kmeans(x, 3, init=[[0.1, 0.2], [0.1, 0.15], [0.5, 1.0]])
    res = vc.big_vns_clust(x, 3, 70, time_limit=10.0, max_iterations=500, seed=1)
    again = vc.big_vns_clust(x, 3, 70, time_limit=10.0, max_iterations=500, seed=1)
    base = vc.big_vns_clust(x, 3, 70, time_limit=10.0, max_iterations=500, seed=1, baseline=True)

    assert res.objective == again.objective
    assert len(res.labels) == 6000 and set(res.labels) <= {0, 1, 2}
    assert res.p_trace[:4] == [1, 2, 3, 1]
    assert set(base.p_trace) == {0}
    assert abs(vc.objective(x, res.centroids) - res.objective) <= 1e-9 * res.objective
    labels, f = vc.assign_points(x, res.centroids)
    assert labels == res.labels and f == res.objective
    assert vc.relative_error(110.0, 100.0) == 10.0

    try:
        vc.big_vns_clust(x, 3, 100000)
    except ValueError:
        pass
    else:
        raise AssertionError("oversized sample accepted")

    print(f"adversarial init  {trapped.objective:.2f}")
    print(f"sampled VNS       {res.objective:.2f} ({res!r})")
    print(f"Big-means         {base.objective:.2f}")
    print("smoke test ok")


if __name__ == "__main__":
    main()
