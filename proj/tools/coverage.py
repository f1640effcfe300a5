#!/usr/bin/env python3
"""Instrumented build of the unit tests, then a gcovr line summary of src/."""

import argparse
import json
import shutil
import subprocess
import sys
from pathlib import Path


def run(cmd, **kw):
    print("+", " ".join(str(c) for c in cmd), flush=True)
    subprocess.run([str(c) for c in cmd], check=True, **kw)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--source", type=Path, default=Path(__file__).resolve().parent.parent)
    ap.add_argument("--build-dir", type=Path, required=True)
    ap.add_argument("--output", type=Path, required=True)
    args = ap.parse_args()

    src = args.source.resolve()
    build = args.build_dir.resolve()
    gcovr = shutil.which("gcovr")
    if gcovr is None:
        sys.exit("gcovr not found")

    gen = ["-G", "Ninja"] if shutil.which("ninja") else []
    run(["cmake", "-S", src, "-B", build, *gen, "-DCMAKE_BUILD_TYPE=Debug", "-DKALE_COVERAGE=ON",
         "-DKALE_BUILD_TESTS=ON", "-DKALE_BUILD_PYTHON=OFF", "-DKALE_BUILD_CLI=OFF"])
    run(["cmake", "--build", build, "--target", "kale_unit_tests"])
    for gcda in build.rglob("*.gcda"):
        gcda.unlink()
    run([build / "tests" / "kale_unit_tests", "--gtest_brief=1"], cwd=build)

    args.output.parent.mkdir(parents=True, exist_ok=True)
    run([gcovr, "--root", src, "--filter", src / "src", "--object-directory", build,
         "--json-summary", args.output, "--txt", "-"], cwd=build)
    summary = json.loads(args.output.read_text())
    print(f"line coverage {summary['line_percent']}%")


if __name__ == "__main__":
    main()
