"""Writes data/suites/fixture.jsonl: 30 questions over the shipped fixtures with
expected answers computed directly from the CSVs with pandas.

    python3 tools/oracles/make_fixture_suite.py [data-dir]
"""

import json
import math
import re
import sys
from pathlib import Path

import pandas as pd

DATA = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parents[2] / "data"
core = pd.read_csv(DATA / "fixtures" / "coremof_mini.csv", index_col=0)
pred = pd.read_csv(DATA / "fixtures" / "predictions.csv")
genes = pd.read_csv(DATA / "fixtures" / "gene_landscape.csv")

items = []


def add(task, question, expect):
    items.append({"id": f"fixture-{len(items) + 1:03d}", "task": task, "question": question, "expect": expect})


def numeric(v, tol=1e-6):
    return {"type": "numeric", "value": float(v), "rel_tol": tol}


def regex(p):
    return {"type": "regex", "pattern": p}


def cell(name, col, frame=core):
    return frame.loc[frame["name"] == name, col].iloc[0]


def arg(col, high, frame=core):
    d = frame.dropna(subset=[col])
    return d.sort_values([col, "name"], ascending=[not high, True]).iloc[0]["name"]


# Table lookups.
add("search", "What is the accessible surface area of JUKPAI in m^2/cm^3?",
    numeric(cell("JUKPAI", "Accessible Surface Area (m^2/cm^3)")))
add("search", "What is the pore limiting diameter of YUSGID?", numeric(cell("YUSGID", "Pore limiting diameter (Å)")))
add("search", "What is the density of ACOGEF?", numeric(cell("ACOGEF", "Density (g/cm^3)")))
add("search", "What is the largest cavity diameter of XEGKUR?", numeric(cell("XEGKUR", "Largest cavity diameter (Å)")))
add("search", "What is the void fraction of TATFOL?", numeric(cell("TATFOL", "void fraction")))
add("search", "What is the accessible volume fraction of IZEHAX?",
    numeric(cell("IZEHAX", "Accessible volume fraction")))
add("search", "Can you tell me the accessible pore volume of NELVAC?",
    numeric(cell("NELVAC", "Accessible pore volume (cm^3/g)")))
add("search", "What metal type is found in MOJJUR?", regex(re.escape(str(cell("MOJJUR", "Metal type")))))
add("search", "Does DUVNIS01 have an open metal site?",
    regex(r"\bis " + ("True" if cell("DUVNIS01", "Has open metal site") else "False") + r"\b"))
add("search", "Which material has the highest accessible surface area in m^2/g?",
    regex(r"\b" + arg("Accessible Surface Area (m^2/g)", True) + r"\b"))
add("search", "Which material has the lowest density?", regex(r"\b" + arg("Density (g/cm^3)", False) + r"\b"))
add("search", "How many materials have a pore limiting diameter greater than 5 Å?",
    numeric((core["Pore limiting diameter (Å)"] > 5).sum()))
add("search", "How many materials have a density below 0.8 g/cm^3?", numeric((core["Density (g/cm^3)"] < 0.8).sum()))
top3 = core.sort_values(["void fraction", "name"], ascending=[False, True])["name"].head(3).tolist()
add("search", "List the top 3 materials with the highest void fraction.", regex(".*".join(map(re.escape, top3))))
add("search", "What is the largest free pore diameter of WAWGOQ?",
    numeric(cell("WAWGOQ", "Largest free pore diameter (Å)")))

# Model predictions (named materials).
add("prediction", "What is the CO2 Henry coefficient of XEGKUR at 298 K?",
    numeric(math.exp(cell("XEGKUR", "CO2_henry_coefficient_298K", pred)), 1e-3))
add("prediction", "What is the bandgap of ACOGEF?", numeric(cell("ACOGEF", "bandgap", pred)))
add("prediction", "What is the thermal stability of JUKPAI?", numeric(cell("JUKPAI", "thermal_stability", pred)))
add("prediction", "What is the hydrogen uptake of XEGKUR at 100 bar and 77 K?",
    numeric(cell("XEGKUR", "hydrogen_uptake_100bar_77K", pred)))
add("prediction", "What is the O2 uptake of MOJJUR at 298 K and 1 bar?",
    numeric(cell("MOJJUR", "O2_uptake_1bar_298K", pred)))
add("prediction", "What is the N2 diffusivity of NISPEL at 298 K?",
    numeric(cell("NISPEL", "N2_diffusivity_dilute_298K", pred)))
add("prediction", "What is the hydrogen diffusivity of LOLREL at 77 K?",
    numeric(cell("LOLREL", "hydrogen_diffusivity_dilute_77K", pred)))
add("prediction", "What is the solvent removal stability of JALCAD?",
    numeric(cell("JALCAD", "solvent_removal_stability", pred)))
add("prediction", "Which material has the highest bandgap?", regex(r"\b" + arg("bandgap", True, pred) + r"\b"))
add("prediction", "Which material has the lowest thermal stability?",
    regex(r"\b" + arg("thermal_stability", False, pred) + r"\b"))
add("prediction", "What is the N2 uptake of GUCJAQ at 298 K and 1 bar?",
    numeric(cell("GUCJAQ", "N2_uptake_1bar_298K", pred)))
add("prediction", "What is the O2 diffusivity of FOTNIN at 298 K?",
    numeric(cell("FOTNIN", "O2_diffusivity_dilute_298K", pred)))


# Generation: the answer names the best gene, which must be the landscape optimum.
def best_gene(col, high):
    d = genes.sort_values([col, "gene"], ascending=[not high, True])
    return d.iloc[0]["gene"]


add("generation", "Generate a material with the highest accessible surface area.",
    regex(r"best gene is " + re.escape(best_gene("accessible_surface_area", True)) + r"\b"))
add("generation", "Create a MOF with the lowest density.",
    regex(r"best gene is " + re.escape(best_gene("density", False)) + r"\b"))
add("generation", "Design a material with the largest cavity diameter.",
    regex(r"best gene is " + re.escape(best_gene("largest_cavity_diameter", True)) + r"\b"))

assert len(items) == 30, len(items)
with open(DATA / "suites" / "fixture.jsonl", "w", encoding="utf-8") as f:
    for it in items:
        f.write(json.dumps(it, ensure_ascii=False) + "\n")
