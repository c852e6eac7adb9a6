"""Average entropy and GAP along a layered schedule, from quantized density evolution.

The curve shows how fast the decoder sheds uncertainty per message spent.
Summing it over the messages gives tau, the score the schedule search
minimizes.  Uses a 256-bin lattice so it runs in a few seconds.
"""

import numpy as np

from ldpc_sched import (ChannelSpec, GridSpec, TauConfig, channel_densities, random_order,
                        random_regular, row_order)
from ldpc_sched.de import TauEvaluator

g = random_regular(512, 3, 6, seed=1)
dens = channel_densities(ChannelSpec(3.1, 0.5), g, GridSpec(30, 256))
ev = TauEvaluator(g, dens, TauConfig(metric="AE"))

for name, sched in [("row", row_order(g)), ("random", random_order(g, seed=3))]:
    curve = ev.curve(sched)
    every = g.n_checks  # one row per full iteration
    print(f"{name}: tau_AE = {ev(sched):.3f}")
    for nmp, ae, gap in curve[::every]:
        print(f"  nmp {int(nmp):6d}  AE {ae:.3e}  GAP {gap:+.3e}")
