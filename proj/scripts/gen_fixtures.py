#!/usr/bin/env python3
"""Regenerates the bundled desk-scale fixtures under fixtures/.

Everything is table-driven and seeded so reruns are byte-identical. The
retained-groups golden file is derived from the assignment tables plus the
manually traced retention list below; an independent recursion re-checks that
trace before anything is written.
"""

import json
import math
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
FIX = ROOT / "fixtures"

AA = "ACDEFGHIKLMNPQRSTVWY"

# ---------------------------------------------------------------- ontology --

# term_id -> (name, namespace, [parents])
TERMS = {
    "GO:0008150": ("biological_process", "biological_process", []),
    "GO:0009987": ("cellular process", "biological_process", ["GO:0008150"]),
    "GO:0044237": ("cellular metabolic process", "biological_process", ["GO:0009987"]),
    "GO:0006096": ("glycolytic process", "biological_process", ["GO:0044237"]),
    "GO:0006099": ("tricarboxylic acid cycle", "biological_process", ["GO:0044237"]),
    "GO:0006119": ("oxidative phosphorylation", "biological_process", ["GO:0044237"]),
    "GO:0007049": ("cell cycle", "biological_process", ["GO:0009987"]),
    "GO:0000278": ("mitotic cell cycle", "biological_process", ["GO:0007049"]),
    "GO:0007126": ("meiotic cell cycle", "biological_process", ["GO:0007049"]),
    "GO:0032502": ("developmental process", "biological_process", ["GO:0008150"]),
    "GO:0009790": ("embryo development", "biological_process", ["GO:0032502"]),
    "GO:0048856": ("anatomical structure development", "biological_process", ["GO:0032502"]),
    "GO:0050896": ("response to stimulus", "biological_process", ["GO:0008150"]),
    "GO:0006950": ("response to stress", "biological_process", ["GO:0050896"]),
    "GO:0006979": ("response to oxidative stress", "biological_process", ["GO:0006950"]),
    "GO:0009408": ("response to heat", "biological_process", ["GO:0006950"]),
    "GO:0009605": ("response to external stimulus", "biological_process", ["GO:0050896"]),
    "GO:0003674": ("molecular_function", "molecular_function", []),
    "GO:0003824": ("catalytic activity", "molecular_function", ["GO:0003674"]),
    "GO:0016301": ("kinase activity", "molecular_function", ["GO:0003824"]),
    "GO:0016773": ("phosphotransferase activity, alcohol group as acceptor",
                   "molecular_function", ["GO:0003824"]),
    "GO:0004672": ("protein kinase activity", "molecular_function",
                   ["GO:0016301", "GO:0016773"]),
    "GO:0016787": ("hydrolase activity", "molecular_function", ["GO:0003824"]),
    "GO:0008233": ("peptidase activity", "molecular_function", ["GO:0016787"]),
    "GO:0016491": ("oxidoreductase activity", "molecular_function", ["GO:0003824"]),
    "GO:0140101": ("catalytic activity, acting on a tRNA", "molecular_function",
                   ["GO:0003824"]),
    "GO:0005488": ("binding", "molecular_function", ["GO:0003674"]),
    "GO:0003677": ("DNA binding", "molecular_function", ["GO:0005488"]),
    "GO:0003723": ("RNA binding", "molecular_function", ["GO:0005488"]),
    "GO:0046872": ("metal ion binding", "molecular_function", ["GO:0005488"]),
    "GO:0008270": ("zinc ion binding", "molecular_function", ["GO:0046872"]),
    "GO:0005215": ("transporter activity", "molecular_function", ["GO:0003674"]),
    "GO:0022857": ("transmembrane transporter activity", "molecular_function",
                   ["GO:0005215"]),
    "GO:0005575": ("cellular_component", "cellular_component", []),
    "GO:0005622": ("intracellular anatomical structure", "cellular_component",
                   ["GO:0005575"]),
    "GO:0005634": ("nucleus", "cellular_component", ["GO:0005622"]),
    "GO:0005737": ("cytoplasm", "cellular_component", ["GO:0005622"]),
    "GO:0005739": ("mitochondrion", "cellular_component", ["GO:0005737"]),
    "GO:0005811": ("lipid droplet", "cellular_component", ["GO:0005737"]),
    "GO:0005840": ("ribosome", "cellular_component", ["GO:0005622"]),
    "GO:0016020": ("membrane", "cellular_component", ["GO:0005575"]),
    "GO:0005886": ("plasma membrane", "cellular_component", ["GO:0016020"]),
    "GO:0031012": ("extracellular matrix", "cellular_component", ["GO:0005575"]),
}

N_PROTEINS = 200
ACCESSIONS = [f"P{i:05d}" for i in range(1, N_PROTEINS + 1)]
ROOT_ONLY = {"P00199", "P00200"}  # annotated to the BP root only

# direct annotation blocks over ACCESSIONS in order
BP_BLOCKS = [
    ("GO:0006096", 30), ("GO:0006099", 10), ("GO:0006119", 8), ("GO:0044237", 2),
    ("GO:0000278", 20), ("GO:0007126", 5), ("GO:0009790", 18), ("GO:0048856", 22),
    ("GO:0006979", 25), ("GO:0009408", 24), ("GO:0006950", 1), ("GO:0009605", 30),
    ("GO:0008150", 5),
]
MF_BLOCKS = [
    ("GO:0004672", 30), ("GO:0016301", 6), ("GO:0016773", 2), ("GO:0008233", 22),
    ("GO:0016787", 4), ("GO:0016491", 28), ("GO:0003677", 25), ("GO:0003723", 20),
    ("GO:0008270", 18), ("GO:0046872", 5), ("GO:0022857", 24), ("GO:0005215", 6),
    ("GO:0003674", 8),
]
CC_BLOCKS = [
    ("GO:0005634", 25), ("GO:0005739", 20), ("GO:0005737", 10), ("GO:0005840", 15),
    ("GO:0005886", 18), ("GO:0016020", 2), ("GO:0031012", 10),
]

# fixture pruning parameters (overrides of the runtime defaults)
LAMBDA, BETA, TAU0, ALPHA = 0.05, 0.5, 4.0, 0.9
C_TOT = N_PROTEINS

# Manually traced retention outcome for the parameters above.
EXPECTED_RETAINED = {
    "GO:0003677": "support", "GO:0003723": "support", "GO:0004672": "support",
    "GO:0005575": "imbalance", "GO:0006979": "support", "GO:0007049": "imbalance",
    "GO:0009605": "support", "GO:0016491": "support", "GO:0016787": "support",
    "GO:0022857": "support", "GO:0044237": "imbalance", "GO:0046872": "support",
    "GO:0048856": "support",
}


def assign_blocks(order, blocks):
    mapping = {}
    idx = 0
    for term, count in blocks:
        for _ in range(count):
            mapping[order[idx]] = term
            idx += 1
    assert idx == len(order), f"blocks cover {idx} of {len(order)}"
    return mapping


def rotated(exclude_root_only, offset):
    accs = [a for a in ACCESSIONS if not (exclude_root_only and a in ROOT_ONLY)]
    return accs[offset:] + accs[:offset]


def go_annotations():
    bp = assign_blocks(ACCESSIONS, BP_BLOCKS)
    mf = assign_blocks(rotated(True, 67), MF_BLOCKS)
    cc_order = rotated(True, 134)[:100]
    cc = assign_blocks(cc_order, CC_BLOCKS)
    terms = {}
    for acc in ACCESSIONS:
        t = {bp[acc]}
        if acc in mf:
            t.add(mf[acc])
        if acc in cc:
            t.add(cc[acc])
        terms[acc] = sorted(t)
    for acc in ROOT_ONLY:
        assert terms[acc] == ["GO:0008150"]
    return terms, bp, mf, cc


# ------------------------------------------------------------- verification --

def propagated_counts(terms_of):
    children = {t: set() for t in TERMS}
    for t, (_, _, parents) in TERMS.items():
        for p in parents:
            children[p].add(t)
    ancestors = {}

    def closure(term):
        if term in ancestors:
            return ancestors[term]
        out = {term}
        for p in TERMS[term][2]:
            out |= closure(p)
        ancestors[term] = out
        return out

    counts = {t: 0 for t in TERMS}
    for acc, terms in terms_of.items():
        cl = set()
        for t in terms:
            cl |= closure(t)
        for t in cl:
            counts[t] += 1
    return counts, children, closure


def depths():
    out = {}
    frontier = [t for t, (_, _, parents) in TERMS.items() if not parents]
    for t in frontier:
        out[t] = 0
    children = {t: [] for t in TERMS}
    for t, (_, _, parents) in TERMS.items():
        for p in parents:
            children[p].append(t)
    while frontier:
        nxt = []
        for t in frontier:
            for c in children[t]:
                if c not in out:
                    out[c] = out[t] + 1
                    nxt.append(c)
        frontier = nxt
    return out


def check_retention(counts, children, depth):
    m = lambda d: LAMBDA * C_TOT * (1 + BETA * d)
    tau = lambda d: TAU0 * (ALPHA ** d)
    retained = {}
    visited = set()

    def visit(v):
        if v in visited:
            return
        visited.add(v)
        kids = sorted(children[v])
        nonzero = [counts[c] for c in kids if counts[c] > 0]
        if len(nonzero) >= 2 and max(nonzero) / min(nonzero) > tau(depth[v]):
            retained[v] = "imbalance"
            return
        qualifying = [c for c in kids if counts[c] >= m(depth[c])]
        if qualifying:
            for c in qualifying:
                visit(c)
        elif counts[v] >= m(depth[v]):
            retained[v] = "support"

    for root in sorted(t for t, (_, _, p) in TERMS.items() if not p):
        visit(root)
    assert retained == EXPECTED_RETAINED, (
        f"trace mismatch:\n got {json.dumps(retained, indent=1, sort_keys=True)}")
    return retained


# ------------------------------------------------------------------ content --

def make_sequences(bp):
    rng = random.Random(20240901)
    seqs = {}
    fam_of = {}
    start = 0
    fam_id = 0
    sizes_cycle = [4, 3, 2, 1, 5]
    for term, count in BP_BLOCKS:
        block = ACCESSIONS[start:start + count]
        start += count
        i = 0
        c = 0
        while i < len(block):
            size = min(sizes_cycle[c % len(sizes_cycle)], len(block) - i)
            c += 1
            fam_id += 1
            length = rng.randint(120, 160)
            seed_seq = "".join(rng.choice(AA) for _ in range(length))
            for acc in block[i:i + size]:
                seq = list(seed_seq)
                n_mut = max(1, int(0.08 * length))
                for pos in rng.sample(range(length), n_mut):
                    seq[pos] = rng.choice(AA.replace(seq[pos], ""))
                seqs[acc] = "".join(seq)
                fam_of[acc] = f"FAM{fam_id:03d}"
            i += size
    return seqs, fam_of


def superkingdom(acc):
    n = int(acc[1:])
    if n <= 100:
        return "Eukaryota"
    if n <= 160:
        return "Bacteria"
    if n <= 185:
        return "Archaea"
    return "Viruses"


def write_obo():
    lines = ["format-version: 1.2", "ontology: toy-go", ""]
    for term in sorted(TERMS):
        name, ns, parents = TERMS[term]
        lines += [f"[Term]", f"id: {term}", f"name: {name}", f"namespace: {ns}"]
        for p in parents:
            lines.append(f"is_a: {p} ! {TERMS[p][0]}")
        lines.append("")
    # one obsolete stanza, skipped by the parser
    lines += ["[Term]", "id: GO:0000005", "name: obsolete ribosomal chaperone activity",
              "namespace: molecular_function", "is_obsolete: true", ""]
    (FIX / "toy_go.obo").write_text("\n".join(lines))


def write_proteins(terms_of, bp, mf, cc, seqs, fam_of):
    rows = []
    for acc in ACCESSIONS:
        fam = fam_of[acc]
        bp_name = TERMS[bp[acc]][0]
        mf_name = TERMS[mf[acc]][0] if acc in mf else ""
        cc_name = TERMS[cc[acc]][0] if acc in cc else ""
        func_bits = [f"Involved in {bp_name}"]
        if mf_name:
            func_bits.append(f"exhibits {mf_name}")
        annotation = {
            "name": f"{fam} domain protein {acc}",
            "function": "; ".join(func_bits) + ".",
            "location": cc_name.capitalize() if cc_name else "",
            "family": f"{fam} family",
            "similarity": f"Belongs to the {fam} family.",
        }
        rows.append({
            "accession": acc,
            "sequence": seqs[acc],
            "go_terms": terms_of[acc],
            "superkingdom": superkingdom(acc),
            "annotation": annotation,
        })
    with open(FIX / "proteins.jsonl", "w") as f:
        for row in rows:
            f.write(json.dumps(row, sort_keys=True) + "\n")
    return rows


def write_golden(retained, counts, children, closure, terms_of, depth):
    # group membership: protein belongs to g iff an annotation is g or below g
    records = []
    for term in sorted(retained):
        members = sorted(
            acc for acc, terms in terms_of.items()
            if any(term in closure(t) for t in terms))
        assert len(members) == counts[term], (term, len(members), counts[term])
        name, ns, _ = TERMS[term]
        records.append({
            "term_id": term, "name": name, "namespace": ns, "depth": depth[term],
            "count": len(members), "rule": retained[term], "protein_ids": members,
        })
    (FIX / "golden").mkdir(exist_ok=True)
    with open(FIX / "golden" / "retained_groups.jsonl", "w") as f:
        for r in records:
            f.write(json.dumps(r, sort_keys=True) + "\n")


def write_mock_script():
    rules = [
        {"match": "contains",
         "pattern": "compose a concise protein information description",
         "reply": ("PROTEIN NAME: mock protein {{hash}}\n"
                   "FUNCTION: catalyzes mock reaction {{hash}}\n"
                   "SUBCELLULAR LOCATION: cytoplasm\n"
                   "FAMILY: mock family {{hash}}\n"
                   "KEY SEQUENCE MOTIF: N/A\n\n"
                   "Extended Information: deterministic mock description {{hash}}.")},
        {"match": "contains",
         "pattern": "design 1 True/False",
         "reply": ("Stem: The protein integrates catalytic and localization features "
                   "recorded under token {{hash}}.; Answer: True; Explanation: The "
                   "annotation block {{hash}} supports the statement.")},
        {"match": "contains",
         "pattern": "describe the given amino-acid",
         "reply": ("A brief overview of the protein with the provided amino acid sequence "
                   "is as follows: deterministic mock summary {{hash}} covering function, "
                   "localization, motifs, and catalysis.")},
        {"match": "contains",
         "pattern": "generate exactly 1-9 distinct",
         "reply": ("<Questions>\n1. What is the primary function of this protein ({{hash}})?\n"
                   "2. Where does this protein localize ({{hash}})?\n<\\Questions>\n"
                   "<Answers>\n1. It performs its annotated function ({{hash}}).\n"
                   "2. It localizes to its annotated compartment ({{hash}}).\n</Answers>")},
    ]
    with open(FIX / "mock_llm_script.jsonl", "w") as f:
        for r in rules:
            f.write(json.dumps(r, sort_keys=True) + "\n")


def write_dataset(seqs, fam_of, bp):
    rng = random.Random(77)
    items = []
    picks = ["P00003", "P00033", "P00055", "P00080", "P00101", "P00120", "P00170", "P00190"]
    tasks = ["protdescribe", "protdescribe", "protdescribe",
             "protein2text-qa", "protein2text-qa", "protein2text-qa",
             "mol-instructions", "mol-instructions"]
    for i, (acc, task) in enumerate(zip(picks, tasks), 1):
        seq = list(seqs[acc])
        for pos in rng.sample(range(len(seq)), max(1, len(seq) // 20)):
            seq[pos] = rng.choice(AA.replace(seq[pos], ""))
        bp_name = TERMS[bp[acc]][0]
        if task == "protdescribe":
            question = "Provide a description of the protein with the given amino acid sequence."
            reference = (f"A protein of the {fam_of[acc]} family involved in {bp_name}.")
        elif task == "protein2text-qa":
            question = f"What biological process involves this protein?"
            reference = f"It participates in {bp_name}."
        else:
            question = "Summarize the main function of the given protein sequence."
            reference = f"The protein functions in {bp_name}."
        items.append({
            "id": f"Q{i:05d}", "sequence": "".join(seq), "question": question,
            "reference": reference, "task": task,
        })
    with open(FIX / "dataset_small.jsonl", "w") as f:
        for item in items:
            f.write(json.dumps(item, sort_keys=True) + "\n")


def write_ratings():
    rows = ["item_id,rater_id,condition,score"]
    scores = {
        "I1": (4, 2), "I2": (5, 3), "I3": (3, 3), "I4": (4, 1),
        "I5": (2, 3), "I6": (5, 4),
    }
    jitter = {"R1": 0, "R2": 0, "R3": -1}
    for item, (w, wo) in scores.items():
        for rater, d in jitter.items():
            rows.append(f"{item},{rater},with,{max(0, min(5, w + d))}")
            rows.append(f"{item},{rater},without,{max(0, min(5, wo + d))}")
    (FIX / "ratings_sample.csv").write_text("\n".join(rows) + "\n")


UNIPROT_HEADER = ["Entry", "Sequence", "Gene Ontology IDs",
                  "Taxonomic lineage (SUPERKINGDOM)", "Protein names", "Function [CC]",
                  "Subcellular location [CC]", "Protein families", "Sequence similarities"]


def write_uniprot_tsv(seqs):
    rows = ["\t".join(UNIPROT_HEADER)]
    sample = [
        ("U00001", seqs["P00001"], "GO:0006096; GO:0004672", "Eukaryota",
         "Imported kinase U00001", "FUNCTION: Phosphorylates substrates.",
         "SUBCELLULAR LOCATION: Cytoplasm.", "Kinase family", "Belongs to the kinase family."),
        ("U00002", seqs["P00151"], "GO:0009605", "Bacteria",
         "Imported sensor U00002", "FUNCTION: Responds to stimuli.", "", "", ""),
        ("U00003", seqs["P00190"], "", "Viruses", "Imported orphan U00003", "", "", "", ""),
    ]
    for row in sample:
        rows.append("\t".join(row))
    (FIX / "uniprot_sample.tsv").write_text("\n".join(rows) + "\n")


def write_uniprot_full_tsv(protein_rows):
    # the whole fixture corpus as a TSV export; importing it must reproduce
    # proteins.jsonl exactly
    rows = ["\t".join(UNIPROT_HEADER)]
    for p in protein_rows:
        a = p["annotation"]
        rows.append("\t".join([
            p["accession"], p["sequence"], "; ".join(p["go_terms"]), p["superkingdom"],
            a["name"], a["function"], a["location"], a["family"], a["similarity"],
        ]))
    (FIX / "uniprot_full.tsv").write_text("\n".join(rows) + "\n")


def main():
    FIX.mkdir(exist_ok=True)
    terms_of, bp, mf, cc = go_annotations()
    counts, children, closure = propagated_counts(terms_of)
    depth = depths()
    retained = check_retention(counts, children, depth)
    seqs, fam_of = make_sequences(bp)

    write_obo()
    protein_rows = write_proteins(terms_of, bp, mf, cc, seqs, fam_of)
    write_golden(retained, counts, children, closure, terms_of, depth)
    write_mock_script()
    write_dataset(seqs, fam_of, bp)
    write_ratings()
    write_uniprot_tsv(seqs)
    write_uniprot_full_tsv(protein_rows)
    print(f"fixtures written to {FIX}")
    print(f"retained nodes: {len(retained)}")


if __name__ == "__main__":
    main()
