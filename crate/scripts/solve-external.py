#!/usr/bin/env python3
"""Solve an exported LP file with HiGHS and write a `name value` solution dump.

Usage: solve-external.py MODEL.lp SOLUTION.txt [--time-limit SECONDS]

The dump starts with `# objective X` and `# status S` and lists every
variable with a nonzero value, one per line, under its original name.
Exit code 0 on OPTIMAL, 2 on INFEASIBLE, 3 on TIME_LIMIT, 1 otherwise.
"""

import argparse
import os
import re
import sys
import tempfile

import highspy

# HiGHS reads `[` and `]` in LP files as quadratic-term brackets.
TO_SAFE = str.maketrans("[]", "()")
FROM_SAFE = str.maketrans("()", "[]")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("model")
    parser.add_argument("solution")
    parser.add_argument("--time-limit", type=float)
    args = parser.parse_args()

    with open(args.model, encoding="ascii") as f:
        text = f.read()
    if re.search(r"[()]", text):
        print("model already contains parentheses; cannot translate names", file=sys.stderr)
        return 1

    fd, safe_path = tempfile.mkstemp(suffix=".lp")
    try:
        with os.fdopen(fd, "w", encoding="ascii") as f:
            f.write(text.translate(TO_SAFE))
        h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        if args.time_limit is not None:
            h.setOptionValue("time_limit", args.time_limit)
        if h.readModel(safe_path) != highspy.HighsStatus.kOk:
            print(f"HiGHS could not read {args.model}", file=sys.stderr)
            return 1
        h.run()
    finally:
        os.unlink(safe_path)

    status = h.getModelStatus()
    if status == highspy.HighsModelStatus.kOptimal:
        label, code = "OPTIMAL", 0
    elif status == highspy.HighsModelStatus.kInfeasible:
        label, code = "INFEASIBLE", 2
    elif status == highspy.HighsModelStatus.kTimeLimit:
        label, code = "TIMEOUT", 3
    else:
        print(f"unexpected HiGHS status {h.modelStatusToString(status)}", file=sys.stderr)
        return 1

    with open(args.solution, "w", encoding="ascii") as out:
        out.write(f"# status {label}\n")
        if code != 2:
            info = h.getInfo()
            out.write(f"# objective {info.objective_function_value:.10g}\n")
            values = h.getSolution().col_value
            lp = h.getLp()
            for name, value in zip(lp.col_names_, values):
                if abs(value) > 1e-9:
                    out.write(f"{name.translate(FROM_SAFE)} {value:.10g}\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
