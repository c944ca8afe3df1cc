import logging

from safd.experiments import run_counterexample

logging.basicConfig(level=logging.INFO)

# λ = 3/4 on 2^4 maps: both coordinates exponentially separated, yet the dimension drops below 2
report = run_counterexample("3/4", 4, samples=200_000, seed=0, workers=4)

for row in report.table("dimensions").rows:
    print(*row)
for v in report.verdicts:
    print(v.status.value.upper(), v.name, v.value)

report.write_json("counterexample.json")
