"""The whole pipeline on the shipped synthetic task, via the CLI entry points.

Run: python demos/06_full_pipeline.py
"""

import json
import tempfile
from pathlib import Path

from conspec.cli import main
from conspec.fixtures import mini_rival_dir

root = mini_rival_dir()
manifest = str(root / "manifest.json")
work = Path(tempfile.mkdtemp(prefix="conspec-demo-"))
print("fixture:", root)
print("outputs:", work)

# 1. align the two embedding spaces
main(["fit-map", "--manifest", manifest, "--out", str(work / "map.json")])

# 2. concept and class directions from caption embeddings
main(["directions", "--manifest", manifest, "--out", str(work / "directions.json")])

# 3. focus regions for the class under analysis
main(["regions", "--manifest", manifest, "--class", "truck", "--region", "A2",
      "--out", str(work / "regions.json")])

# 4. statistical validation of the elicited predicates
main(["validate", "--manifest", manifest, "--class", "truck",
      "--out", str(work / "report.csv"), "--heatmap", str(work / "heatmap.json")])

# 5. significance-filtered specifications, written in concrete syntax
main(["elicit", "--manifest", manifest, "--class", "truck", "--filter-significant",
      "--out", str(work / "truck_significant.spec")])
print("\nelicited specs:")
print((work / "truck_significant.spec").read_text())

# 6. formal verification over the correct-truck region
main(["verify", "--manifest", manifest, "--class", "truck", "--region", "A2",
      "--specs", str(root / "truck.spec"), "--map", str(work / "map.json"),
      "--out-dir", str(work / "verify"), "--deterministic"])

# 7. spot-audit one result with the brute-force grid oracle
main(["audit", "--manifest", manifest, "--class", "truck", "--region", "A2",
      "--spec", "predict(truck) => gt(wheels, ears)", "--dims", "0,1,2", "--step", "0.05"])

print("\nverification records:")
for line in (work / "verify" / "report.jsonl").read_text().splitlines():
    rec = json.loads(line)
    print(f"  {rec['spec_text']!r}: {rec['outcome']} (slack {rec['epsilon']:+.3f})")
