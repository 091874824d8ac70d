"""
Command-line workflow
=====================

Generate an instance, solve it, diagnose it and check the termination
bound, all through the ``gnepsharp`` command (called in-process here).
"""

import json
import tempfile
from pathlib import Path

from gnepsharp.cli import main

work = Path(tempfile.mkdtemp())
inst = work / "seed7.json"
main(["generate", "--players", "2", "--dim", "1", "--seed", "7", "--delta-floor", "0.5", "--out", str(inst)])
print(inst.read_text())

###############################################################################
# Solve with the proximal point method; the trace CSV and JSON report land
# in the output directory.

code = main(["solve", "--instance", str(inst), "--out", str(work / "runs")])
print("exit code", code)
print((work / "runs" / "seed7.trace.csv").read_text())

###############################################################################
# Diagnose and bound.  Bundled fixtures can be named directly.

main(["diagnose", "--instance", str(inst), "--out", str(work / "runs")])
rep = json.loads((work / "runs" / "seed7.diagnose.json").read_text())
print(rep["outcome"]["verdicts"])
main(["solve", "--instance", "E1", "--out", str(work / "runs")])
main(["bound", "--instance", "E1", "--x0", "2,2", "--epsilon", "1.1", "--trace", str(work / "runs" / "E1.trace.csv")])
print("bound on E0 exits with", main(["bound", "--instance", "E0"]))
