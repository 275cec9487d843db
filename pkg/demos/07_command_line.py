"""
End-to-end experiment from the command line
===========================================

Drive the ``sesh`` command the way a shell script would: build an index,
run two methods and produce the report tables.
"""

import subprocess
import sys
import tempfile
from pathlib import Path

from sesh.synthetic import FILES, bundled_path

data = bundled_path()


def sesh(*args):
    cmd = [sys.executable, "-m", "sesh", *map(str, args)]
    print("$ sesh", " ".join(map(str, args[:1])), "...")
    subprocess.run(cmd, check=True)


with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    sesh("index", "--corpus", data / FILES["corpus"], "--spam", data / FILES["spam"], "--out", tmp / "bench.idx")
    common = ["--index", tmp / "bench.idx", "--sessions", data / FILES["sessions"],
              "--qrels", data / FILES["qrels"], "--mapping", data / FILES["mapping"]]
    for method in ("tf_last", "qcm"):
        sesh("run", "--method", method, *common, "--out", tmp / method)
    sesh("report", tmp / "tf_last" / "tf_last.run", tmp / "qcm" / "qcm.run",
         "--qrels", data / FILES["qrels"], "--sessions", data / FILES["sessions"],
         "--mapping", data / FILES["mapping"], "--index", tmp / "bench.idx", "--out", tmp / "report")
    for name in sorted(p.name for p in (tmp / "report").iterdir()):
        print("report file:", name)
    print((tmp / "report" / "fig4_progressing.csv").read_text())
