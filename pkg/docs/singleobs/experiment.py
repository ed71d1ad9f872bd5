"""Example running a small fidelity sweep"""

from singleobs import build_spec, run_fidelity_sweep

spec = build_spec("sweep", ranks=[1, 2, 3], trials=5, couplers=2, workers=2)
result = run_fidelity_sweep(spec)

for agg in result.aggregates():
    print(agg["rank"], agg["mean_fidelity"], agg["std_fidelity"])

result.write("results")
