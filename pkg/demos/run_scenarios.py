"""Run every JSON scenario in scenarios/ through the command line and report exit codes."""

import contextlib
import io
from pathlib import Path

from condinf.cli import main

root = Path(__file__).resolve().parent.parent / "scenarios"
for path in sorted(root.glob("*.json")):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(["verify", "--scenario", str(path)])
    print(f"{path.name:32s} exit {code}")
    for line in err.getvalue().splitlines():
        print(f"    {line[:110]}")
