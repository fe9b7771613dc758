"""The whole pipeline through the command-line interface.

Writes synthetic fixture inputs into a scratch directory, then drives the
`xlmem` subcommands the way a real analysis would: similarity matrix in,
correlation tables and manifests out.  Every bundle carries a manifest with
input digests, so reruns are byte-identical.
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

from xlmem.synthetic import family_fixture


def run(*args: str) -> None:
    cmd = [sys.executable, "-m", "xlmem.cli", *args]
    print("$ xlmem " + " ".join(args))
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        sys.exit(proc.stderr)
    print(proc.stdout, end="")


workdir = Path(tempfile.mkdtemp(prefix="xlmem-demo-"))
print(f"working in {workdir}\n")

fixture = family_fixture()
fixture.similarity.to_csv(workdir / "similarity.csv")
fixture.tokens.to_csv(workdir / "tokens.csv")
signal_args = []
for name, signal in fixture.signals.items():
    signal.to_csv(workdir / f"{name}.csv")
    signal_args += ["--signal", f"{name}={workdir / (name + '.csv')}"]

run("graph", "--similarity", str(workdir / "similarity.csv"), "--theta", "0.5",
    "--output-dir", str(workdir / "graph"))

run("correlate", "--similarity", str(workdir / "similarity.csv"), *signal_args,
    "--tokens", str(workdir / "tokens.csv"), "--theta", "0.5",
    "--output-dir", str(workdir / "correlate"))

run("sweep", "--similarity", str(workdir / "similarity.csv"), *signal_args,
    "--tokens", str(workdir / "tokens.csv"), "--thetas", "0.1,0.3,0.5,0.7,0.95",
    "--output-dir", str(workdir / "sweep"))

run("consistency", "--signal-a", str(workdir / "EM.csv"),
    "--signal-b", str(workdir / "RM_BLEU.csv"), "--output-dir", str(workdir / "consistency"))

print("\ncorrelate.csv:")
print((workdir / "correlate" / "correlate.csv").read_text())

manifest = json.loads((workdir / "correlate" / "manifest.json").read_text())
print("manifest records", len(manifest["inputs"]), "input digests and",
      len(manifest["tables"]), "table digest(s); versions:", manifest["versions"])
