"""Full-scale validation run: paper configuration, lookahead vs lookback."""

import json
import sys
import time

import numpy as np

from adrom.driver import RunConfig, avg_rel_error, run_adeim, run_fom
from adrom.model import Grid1D, RdeParams, TimeGrid


def main():
    K = int(sys.argv[1]) if len(sys.argv) > 1 else 50000
    cfg = RunConfig(grid=Grid1D(1024), time=TimeGrid(1e-3, K),
                    params=RdeParams(), n=9, w_init=500, w=10, z=3, c_tau=5)

    t0 = time.time()
    fom = run_fom(cfg)
    print(f"FOM: {fom.wall_time:.1f}s", flush=True)

    la = run_adeim(cfg)
    print(f"lookahead: {la.wall_time:.1f}s unstable={la.unstable} "
          f"fallbacks={la.diagnostics['predictor_fallbacks']}", flush=True)
    if not la.unstable:
        err = avg_rel_error(la, fom)
        print(f"avg rel error lookahead: {err:.5f}", flush=True)
        # error over trailing half to see post-transient tracking
        h = K // 2
        num = float(np.linalg.norm(la.states[:, h:] - fom.states[:, h:])**2)
        den = float(np.linalg.norm(fom.states[:, h:])**2)
        print(f"trailing-half error: {num/den:.5f}", flush=True)
        probe_eta = la.states[256, ::100]
        probe_fom = fom.states[256, ::100]
        print("probe eta rom (sampled):", np.round(probe_eta[::50], 3).tolist(), flush=True)
        print("probe eta fom (sampled):", np.round(probe_fom[::50], 3).tolist(), flush=True)
        print("max eta final rom/fom:",
              la.states[:1024, -1].max(), fom.states[:1024, -1].max(), flush=True)
    del la

    lb = run_adeim(RunConfig(grid=Grid1D(1024), time=TimeGrid(1e-3, K),
                             params=RdeParams(), n=9, w_init=500, w=10, z=3,
                             c_tau=5, strategy="lookback"))
    print(f"lookback: {lb.wall_time:.1f}s unstable={lb.unstable} "
          f"failed={lb.failed_step}", flush=True)
    if not lb.unstable and lb.states.shape == fom.states.shape:
        print(f"avg rel error lookback: {avg_rel_error(lb, fom):.5f}", flush=True)
    print(f"total {time.time()-t0:.0f}s", flush=True)


if __name__ == "__main__":
    main()
