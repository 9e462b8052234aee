"""Synthetic patent-like corpora with known reaction spans.

Each document is a sequence of single-line paragraphs: background prose,
example headings and multi-paragraph reaction recipes. Some recipes end in
a characterisation tail (NMR/MS data) that is either appended to the last
reaction paragraph outside the gold span, or placed in its own paragraph
tagged O.
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass
from pathlib import Path

from .corpus import ReactionAnnotation, write_ann
from .segment import CharSpan


@dataclass
class SynthProfile:
    docs: int = 20
    paragraphs_per_doc: int = 60
    reactions_per_doc: int = 5
    min_reaction_paragraphs: int = 1
    max_reaction_paragraphs: int = 4
    inline_tail_prob: float = 0.2
    separate_tail_prob: float = 0.3
    adjacent_prob: float = 0.2
    label: str = "REACTION"
    prefix: str = "synth"

    def validate(self):
        need = self.reactions_per_doc * (self.max_reaction_paragraphs + 2)
        if self.paragraphs_per_doc < need:
            raise ValueError(f"paragraphs_per_doc must be at least {need} for this profile")
        if not 1 <= self.min_reaction_paragraphs <= self.max_reaction_paragraphs:
            raise ValueError("bad reaction paragraph range")
        return self


_LOCANTS = ["2", "3", "4", "5", "6", "2,4", "3,5", "2,6"]
_SUBST = ["chloro", "bromo", "fluoro", "methyl", "methoxy", "nitro", "amino", "hydroxy", "cyano", "ethyl"]
_PARENTS = ["benzaldehyde", "pyridine", "benzoate", "aniline", "phenol", "benzamide", "pyrimidine",
            "indole", "quinoline", "piperidine", "benzonitrile", "thiophene"]
_REAGENTS = ["K2CO3", "NaH", "Cs2CO3", "NaBH4", "LiAlH4", "Pd(PPh3)4", "NaHCO3", "Et3N", "DIPEA",
             "HATU", "TFA", "HCl", "NaOH", "LiOH", "CuI", "DMAP"]
_SOLVENTS = ["THF", "DMF", "DCM", "toluene", "ethanol", "methanol", "dioxane", "acetonitrile", "DMSO",
             "ethyl acetate", "water"]
_COLOURS = ["white", "pale yellow", "off-white", "colourless", "brown"]

_OPENINGS = [
    "To a solution of {c1} ({g} g, {mm} mmol) in {s} ({ml} mL) was added {r} ({mm2} mmol) at {t} °C.",
    "A mixture of {c1} ({g} g, {mm} mmol), {c2} ({mm2} mmol) and {r} ({g2} g) in {s} ({ml} mL) was prepared.",
    "{C1} ({g} g, {mm} mmol) was dissolved in {s} ({ml} mL) and {r} ({mm2} mmol) was added portionwise.",
    "{R} ({mm2} mmol) was added dropwise to a stirred suspension of {c1} ({g} g, {mm} mmol) in {s} ({ml} mL) at {t} °C.",
    "Under a nitrogen atmosphere, {c1} ({g} g, {mm} mmol) and {c2} ({g2} g) were combined in {s} ({ml} mL).",
]
_CONTINUATIONS = [
    "The reaction mixture was stirred at {t} °C for {h} h and then concentrated under reduced pressure.",
    "After cooling to room temperature, the mixture was diluted with {s} ({ml} mL) and washed with brine.",
    "The organic layer was separated, dried over MgSO4, filtered and evaporated to dryness.",
    "The residue was purified by column chromatography on silica gel eluting with {s} to give the crude product.",
    "The resulting mixture was heated at reflux for {h} h, quenched with saturated NaHCO3 and extracted with {s}.",
    "The precipitate was collected by filtration, washed with cold {s} and dried in vacuo.",
]
_PRODUCT = "{C3} was obtained as a {col} solid ({g} g, {y}% yield)."
_TAIL = ("1H NMR (400 MHz, CDCl3) δ {n1} (s, 1H), {n2} (d, J = {j} Hz, 2H), {n3} (m, 3H). "
         "13C NMR (101 MHz, CDCl3) δ {c13a}, {c13b}, {c13c}, {c13d}. MS m/z {mz} [M+H]+. "
         "HPLC purity {y}%, retention time {h}.{j2} min.")
_HEADINGS = [
    "Example {k}",
    "Step {k}: Preparation of {c1}",
    "Intermediate {k}",
    "Synthesis of {c1} (Compound {k})",
]
_BACKGROUND = [
    "The present invention relates to compounds useful for the treatment of inflammatory diseases.",
    "Compounds of formula (I) may be administered orally, parenterally or topically in suitable dosage forms.",
    "In some embodiments, the compound is {c1} or a pharmaceutically acceptable salt thereof.",
    "The biological activity of the compounds was determined in a cell-based assay as described below.",
    "Table {k} shows the inhibitory concentrations measured for representative examples.",
    "It will be appreciated that the invention is not limited to the particular embodiments described herein.",
    "Suitable protecting groups are described in standard textbooks and may be removed by known methods.",
    "The pharmaceutical composition may further comprise one or more excipients, carriers or diluents.",
    "Patients receiving the compound showed a reduction in symptoms compared with the placebo group.",
    "Abbreviations used herein have their conventional meaning unless otherwise indicated.",
    "Figure {k} illustrates the dose response observed in the animal model.",
    "The compounds described herein can be prepared according to the general schemes below.",
]


class _Filler:
    def __init__(self, rng: random.Random):
        self.rng = rng

    def chem(self):
        r = self.rng
        if r.random() < 0.5:
            return f"{r.choice(_LOCANTS)}-{r.choice(_SUBST)}{r.choice(_PARENTS)}"
        return f"{r.choice(_LOCANTS)}-{r.choice(_SUBST)}-{r.choice(['4', '5', '6'])}-{r.choice(_SUBST)}{r.choice(_PARENTS)}"

    def fill(self, template: str) -> str:
        r = self.rng
        c1, c2, c3 = self.chem(), self.chem(), self.chem()
        reagent = r.choice(_REAGENTS)
        values = {
            "c1": c1, "c2": c2, "C1": c1[0].upper() + c1[1:], "C3": c3[0].upper() + c3[1:],
            "r": reagent, "R": reagent, "s": r.choice(_SOLVENTS),
            "g": f"{r.uniform(0.1, 9.9):.2f}", "g2": f"{r.uniform(0.1, 9.9):.2f}",
            "mm": f"{r.uniform(0.5, 50):.1f}", "mm2": f"{r.uniform(0.5, 50):.1f}",
            "ml": str(r.randint(2, 200)), "t": str(r.choice([0, -78, 25, 60, 80, 100])),
            "h": str(r.randint(1, 24)), "col": r.choice(_COLOURS), "y": str(r.randint(20, 98)),
            "n1": f"{r.uniform(7, 9):.2f}", "n2": f"{r.uniform(6, 8):.2f}", "n3": f"{r.uniform(1, 4):.2f}",
            "j": f"{r.uniform(2, 9):.1f}", "j2": str(r.randint(0, 9)),
            "c13a": f"{r.uniform(150, 170):.1f}", "c13b": f"{r.uniform(120, 140):.1f}",
            "c13c": f"{r.uniform(50, 70):.1f}", "c13d": f"{r.uniform(10, 30):.1f}", "mz": str(r.randint(150, 650)), "k": str(r.randint(1, 120)),
        }
        return template.format(**values)


def _reaction_paragraphs(f: _Filler, n: int, final_product: bool) -> list[str]:
    r = f.rng
    paras = [f.fill(r.choice(_OPENINGS))]
    if n == 1:
        paras[0] += " " + f.fill(r.choice(_CONTINUATIONS))
    for _ in range(n - 1):
        k = r.randint(1, 2)
        paras.append(" ".join(f.fill(t) for t in r.sample(_CONTINUATIONS, k)))
    if final_product:
        paras[-1] += " " + f.fill(_PRODUCT)
    return paras


def generate_document(doc_id: str, profile: SynthProfile, rng: random.Random):
    """Return ``(text, annotations, gold unit spans)`` for one document."""
    f = _Filler(rng)
    p = profile
    lengths = [rng.randint(p.min_reaction_paragraphs, p.max_reaction_paragraphs)
               for _ in range(p.reactions_per_doc)]
    tails = []
    for _ in lengths:
        u = rng.random()
        tails.append("inline" if u < p.inline_tail_prob
                     else "separate" if u < p.inline_tail_prob + p.separate_tail_prob else "none")

    # background paragraphs: one heading before each reaction unless adjacent
    n_bg = p.paragraphs_per_doc - sum(lengths) - tails.count("separate")
    adjacent = [i > 0 and rng.random() < p.adjacent_prob for i in range(len(lengths))]
    headings = sum(not a for a in adjacent)
    free = n_bg - headings
    gaps = [0] * (len(lengths) + 1)
    for _ in range(free):
        gaps[rng.randrange(len(gaps))] += 1
    for i, adj in enumerate(adjacent):
        if adj:
            gaps[0] += gaps[i]
            gaps[i] = 0

    paragraphs: list[str] = []
    spans: list[tuple[int, int, int]] = []  # (first para, last para, chars of tail kept out)

    def background(n):
        for _ in range(n):
            paragraphs.append(f.fill(rng.choice(_BACKGROUND)))

    for i, n in enumerate(lengths):
        background(gaps[i])
        if not adjacent[i]:
            paragraphs.append(f.fill(rng.choice(_HEADINGS)))
        paras = _reaction_paragraphs(f, n, final_product=True)
        tail_chars = 0
        if tails[i] == "inline":
            tail = " " + f.fill(_TAIL)
            paras[-1] += tail
            tail_chars = len(tail)
        first = len(paragraphs)
        paragraphs.extend(paras)
        spans.append((first, len(paragraphs) - 1, tail_chars))
        if tails[i] == "separate":
            paragraphs.append(f.fill(_TAIL))
    background(gaps[-1])

    text = "\n".join(paragraphs) + "\n"
    starts, pos = [], 0
    for para in paragraphs:
        starts.append(pos)
        pos += len(para) + 1
    annotations = []
    for k, (a, b, tail_chars) in enumerate(spans, start=1):
        start = starts[a]
        end = starts[b] + len(paragraphs[b]) - tail_chars
        annotations.append(ReactionAnnotation(f"T{k}", CharSpan(start, end), p.label, text[start:end]))
    return text, annotations, [(a, b) for a, b, _ in spans]


def generate_corpus(profile: SynthProfile, seed: int, out_dir) -> dict:
    """Write ``<prefix>_NNN.txt/.ann`` pairs plus ``synth_manifest.json``."""
    profile.validate()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    manifest = {"profile": asdict(profile), "seed": seed, "documents": {}}
    for i in range(profile.docs):
        doc_id = f"{profile.prefix}_{i:03d}"
        text, anns, unit_spans = generate_document(doc_id, profile, rng)
        (out_dir / f"{doc_id}.txt").write_bytes(text.encode("utf-8"))
        (out_dir / f"{doc_id}.ann").write_bytes(write_ann(anns).encode("utf-8"))
        manifest["documents"][doc_id] = {
            "paragraphs": text.count("\n"),
            "reactions": len(anns),
            "reaction_units": unit_spans,
        }
    (out_dir / "synth_manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                                                 encoding="utf-8")
    return manifest
