#!/usr/bin/env python3
"""Solve LP-format MILP files with scipy's HiGHS backend.

Usage: lp_backend.py MODEL.lp [MODEL2.lp ...]

Prints a JSON array with one entry per input file:
  {"file": str, "status": "optimal"|"infeasible"|"error",
   "objective": float|null, "values": {var: float}}

Understands the LP subset written by the toolkit's exporter: a single-line
Minimize objective, one named row per line (<=, >= or =), an optional Bounds
section, and Generals/Binaries integrality sections.
"""
import json
import re
import sys

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, milp

NUMBER = re.compile(r"[0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?$")
TOKEN = re.compile(r"<=|>=|=|\+|-|[A-Za-z_][A-Za-z0-9_.]*|[0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?")


def parse_terms(tokens, terms, var):
    sign, coef = 1.0, None
    for tok in tokens:
        if tok == "+":
            sign = 1.0
        elif tok == "-":
            sign = -1.0
        elif NUMBER.match(tok):
            coef = float(tok)
        else:
            vid = var(tok)
            terms[vid] = terms.get(vid, 0.0) + sign * (1.0 if coef is None else coef)
            sign, coef = 1.0, None


def parse_signed_number(tokens):
    sign = 1.0
    value = 0.0
    for tok in tokens:
        if tok == "-":
            sign = -1.0
        elif tok == "+":
            sign = 1.0
        else:
            value = float(tok)
    return sign * value


class Model:
    def __init__(self):
        self.var_ids = {}
        self.objective = {}
        self.rows = []  # (terms dict, op, rhs)
        self.lb = {}
        self.ub = {}
        self.integer = set()
        self.binary = set()

    def var(self, name):
        if name not in self.var_ids:
            self.var_ids[name] = len(self.var_ids)
        return self.var_ids[name]


def parse_lp(text):
    model = Model()
    section = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("\\"):
            continue
        lowered = line.lower()
        if lowered in ("minimize", "minimise", "min"):
            section = "objective"
            continue
        if lowered in ("subject to", "st", "s.t."):
            section = "rows"
            continue
        if lowered == "bounds":
            section = "bounds"
            continue
        if lowered in ("generals", "general", "integers"):
            section = "generals"
            continue
        if lowered in ("binaries", "binary", "bin"):
            section = "binaries"
            continue
        if lowered == "end":
            break

        if section == "objective":
            body = line.split(":", 1)[1] if ":" in line else line
            parse_terms(TOKEN.findall(body), model.objective, model.var)
        elif section == "rows":
            _name, body = line.split(":", 1)
            tokens = TOKEN.findall(body)
            op_at = next(i for i, t in enumerate(tokens) if t in ("<=", ">=", "="))
            terms = {}
            parse_terms(tokens[:op_at], terms, model.var)
            rhs = parse_signed_number(tokens[op_at + 1 :])
            model.rows.append((terms, tokens[op_at], rhs))
        elif section == "bounds":
            tokens = TOKEN.findall(line)
            # "lo <= x <= hi" or "lo <= x"
            ops = [i for i, t in enumerate(tokens) if t == "<="]
            lo = parse_signed_number(tokens[: ops[0]])
            name = tokens[ops[0] + 1]
            vid = model.var(name)
            model.lb[vid] = lo
            if len(ops) > 1:
                model.ub[vid] = parse_signed_number(tokens[ops[1] + 1 :])
        elif section == "generals":
            model.integer.add(model.var(line))
        elif section == "binaries":
            model.binary.add(model.var(line))
    return model


def solve(model):
    n = len(model.var_ids)
    c = np.zeros(n)
    for vid, coef in model.objective.items():
        c[vid] = coef
    lb = np.zeros(n)
    ub = np.full(n, np.inf)
    integrality = np.zeros(n)
    for vid in model.integer:
        integrality[vid] = 1
    for vid in model.binary:
        integrality[vid] = 1
        ub[vid] = 1.0
    for vid, lo in model.lb.items():
        lb[vid] = lo
    for vid, hi in model.ub.items():
        ub[vid] = hi

    constraints = None
    if model.rows:
        data, col_idx, row_idx, lo_arr, hi_arr = [], [], [], [], []
        for k, (terms, op, rhs) in enumerate(model.rows):
            for vid, coef in terms.items():
                data.append(coef)
                col_idx.append(vid)
                row_idx.append(k)
            if op == "<=":
                lo_arr.append(-np.inf)
                hi_arr.append(rhs)
            elif op == ">=":
                lo_arr.append(rhs)
                hi_arr.append(np.inf)
            else:
                lo_arr.append(rhs)
                hi_arr.append(rhs)
        a = sparse.csc_matrix(
            (data, (row_idx, col_idx)), shape=(len(model.rows), n)
        )
        constraints = LinearConstraint(a, lo_arr, hi_arr)

    res = milp(
        c=c,
        constraints=constraints,
        integrality=integrality,
        bounds=Bounds(lb, ub),
    )
    names = {vid: name for name, vid in model.var_ids.items()}
    if res.status == 0:
        values = {names[i]: float(res.x[i]) for i in range(n)}
        return {"status": "optimal", "objective": float(res.fun), "values": values}
    if res.status == 2:
        return {"status": "infeasible", "objective": None, "values": {}}
    return {"status": "error", "objective": None, "values": {}}


def main():
    out = []
    for path in sys.argv[1:]:
        try:
            with open(path) as fh:
                model = parse_lp(fh.read())
            result = solve(model)
        except Exception as exc:  # surfaced to the caller per file
            result = {"status": "error", "objective": None, "values": {}, "detail": str(exc)}
        result["file"] = path
        out.append(result)
    json.dump(out, sys.stdout)


if __name__ == "__main__":
    main()
