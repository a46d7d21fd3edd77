#!/usr/bin/env python3
"""Regenerates the WoS fixture corpus and its manifest.

The manifest is computed here from the written files with an independent
parser and an exhaustive pairwise linker, so the Rust tests can compare
against numbers that were not produced by the code under test.
"""

import json
import random
import re
from pathlib import Path

OUT = Path(__file__).resolve().parent
SEED = 20210917
RECORDS = 30
CR_PER_RECORD = 6
THRESHOLD = 0.75

# Variant groups; each inner list is one work. Counts are per variant.
GROUPS = [
    [  # A
        ("LOTKA AJ, 1926, J WASHINGTON ACAD SCI, V16, P317", 7),
        ("LOTKA AJ, 1926, J WASH ACAD SCI, V16, P317", 3),
        ("Lotka A. J., 1926, J WASHINGTON ACAD SCI, V16, P317", 2),
        ("LOTKA AJ, 1926, J WASHINGTON ACADEMY SCI, V16", 2),
    ],
    [  # B
        ("PRICE DJD, 1965, SCIENCE, V149, P510", 6),
        ("PRICE DJ, 1965, SCIENCE, V149, P510", 3),
        ("Price DJD, 1965, SCIENCE, V149", 2),
    ],
    [
        ("GARFIELD E, 1955, SCIENCE, V122, P108", 1),
        ("GARFIELD E, 1955, SCIENCE, V122, P108, DOI 10.1126/science.122.3159.108", 1),
    ],
    [
        ("HIRSCH JE, 2005, P NATL ACAD SCI USA, V102, P16569", 1),
        ("HIRSCH JE, 2005, P NATL ACAD SCI, V102, P16569", 1),
    ],
    [
        ("MERTON RK, 1968, SCIENCE, V159, P56", 1),
        ("MERTON R, 1968, SCIENCE, V159, P56", 1),
    ],
    [
        ("BRADFORD SC, 1934, ENGINEERING-LONDON, V137, P85", 1),
        ("BRADFORD SC, 1934, ENGINEERING, V137, P85", 1),
        ("BRADFORD S, 1934, ENGINEERING-LONDON, V137", 1),
    ],
    [
        ("SMALL H, 1973, J AM SOC INFORM SCI, V24, P265", 1),
        ("SMALL H, 1973, J AM SOC INF SCI, V24, P265", 1),
        ("SMALL HG, 1973, J AM SOC INFORM SCI, V24, P265", 1),
        ("SMALL H, 1973, J AMER SOC INFORM SCI, V24", 1),
    ],
]

SURNAMES = """Abramo Aksnes Bornmann Bar-Ilan Boyack Costas Cronin Egghe Glanzel Haustein
Kostoff Leydesdorff Moed Mutz Narin Noyons Persson Rousseau Schubert Sugimoto Thelwall
Tijssen VanRaan Wouters Zitt Zahedi Larivière Gingras Archambault Bordons Katz Martin
Irvine Hicks Wagner Youtie Shapira Porter Rafols Klavans Milojevic Radicchi Fortunato
Waltman VanEck Marx Haunschild Lutz Wray Priem Piwowar Mohammadi Ortega Torres Delgado""".split()
JOURNALS = """SCIENTOMETRICS|J INFORMETR|RES POLICY|J AM SOC INF SCI TEC|RES EVALUAT|PLOS ONE|
NATURE|J DOC|INFORM PROCESS MANAG|ONLINE INFORM REV|ASLIB PROC|QUANT SCI STUD|
LEARN PUBL|COLL RES LIBR|SOC STUD SCI|MINERVA|ANN REV INFORM SCI|J CHEM INF COMP SCI""".replace("\n", "").split("|")

# Plain works with designed counts; the rest occur once.
PLAIN_HEAVY = [10, 6, 5] + [2] * 24
N_PLAIN = 100


def split_segments(raw):
    out, depth, cur, i = [], 0, "", 0
    while i < len(raw):
        c = raw[i]
        if c == "[":
            depth += 1
        elif c == "]":
            depth = max(0, depth - 1)
        if depth == 0 and raw.startswith(", ", i):
            out.append(cur.strip())
            cur, i = "", i + 2
            continue
        cur += c
        i += 1
    out.append(cur.strip())
    return [s for s in out if s]


def parse_cr(raw):
    segs = split_segments(raw)
    pos = next((k for k, s in enumerate(segs) if re.fullmatch(r"\d{4}", s) and 1000 <= int(s) <= 2100), None)
    author = ", ".join(segs[:pos]) if pos else (segs[0] if pos is None and segs else None)
    rpy = int(segs[pos]) if pos is not None else None
    rest = segs[pos + 1:] if pos is not None else segs[1:]
    volume = page = None
    source, marker, dois = [], False, []
    for s in rest:
        if re.fullmatch(r"V[0-9A-Za-z]+", s):
            marker, volume = True, volume or s[1:]
        elif re.fullmatch(r"P[0-9A-Za-z]+", s):
            marker, page = True, page or s[1:]
        elif s.startswith("DOI "):
            marker = True
            dois.append(s[4:].lower())
        elif not marker:
            source.append(s)
    return {"author": author or None, "rpy": rpy, "source": ", ".join(source) or None,
            "volume": volume, "page": page}


def clean(s):
    s = "".join(c for c in (s or "").lower() if c.isalnum() or c.isspace())
    return " ".join(s.split())


def lev(a, b):
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j - 1] + (ca != cb), prev[j] + 1, cur[j - 1] + 1))
        prev = cur
    return prev[-1]


def links(p, q):
    if p["rpy"] != q["rpy"]:
        return False
    for f in ("volume", "page"):
        if p[f] is not None and q[f] is not None and p[f] != q[f]:
            return False
    a = clean(p["author"]) + "|" + clean(p["source"])
    b = clean(q["author"]) + "|" + clean(q["source"])
    longest = max(len(a), len(b))
    return longest == 0 or 1 - lev(a, b) / longest >= THRESHOLD


def components(strings):
    parsed = [parse_cr(s) for s in strings]
    parent = list(range(len(strings)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(len(strings)):
        for j in range(i + 1, len(strings)):
            if links(parsed[i], parsed[j]):
                parent[find(i)] = find(j)
    comps = {}
    for i in range(len(strings)):
        comps.setdefault(find(i), []).append(strings[i])
    return sorted(sorted(c) for c in comps.values())


def plain_works(rng):
    taken = {raw for g in GROUPS for raw, _ in g}
    out = []
    while len(out) < N_PLAIN:
        author = f"{rng.choice(SURNAMES)} {rng.choice('ABCDEGHJKLMPRSTW')}{rng.choice(['', 'A', 'M', 'R'])}"
        year = rng.randint(1950, 2020)
        raw = f"{author}, {year}, {rng.choice(JOURNALS)}, V{rng.randint(1, 120)}, P{rng.randint(1, 999)}"
        if raw in taken:
            continue
        parsed = parse_cr(raw)
        if any(links(parsed, parse_cr(o)) for o in taken):
            continue
        taken.add(raw)
        out.append(raw)
    return out


def allocate(weighted, rng):
    """Places each string's occurrences in distinct records."""
    slots = [[] for _ in range(RECORDS)]
    for raw, n in sorted(weighted, key=lambda w: -w[1]):
        order = sorted(range(RECORDS), key=lambda r: (len(slots[r]), rng.random()))
        chosen = [r for r in order if raw not in slots[r] and len(slots[r]) < CR_PER_RECORD][:n]
        assert len(chosen) == n, raw
        for r in chosen:
            slots[r].append(raw)
    assert all(len(s) == CR_PER_RECORD for s in slots)
    for s in slots:
        rng.shuffle(s)
    return slots


def record_text(k, crs):
    py = 2007 + k // 2
    title = f"Citation patterns in research evaluation, case {k + 1}"
    lines = [
        "PT J",
        f"AU {SURNAMES[k % len(SURNAMES)]}, A",
        f"   {SURNAMES[(k + 7) % len(SURNAMES)]}, B",
        f"TI {title}",
        "   and the reference publication years",
        f"SO {JOURNALS[k % len(JOURNALS)]}",
        f"PY {py}",
        f"CR {crs[0]}",
        *[f"   {c}" for c in crs[1:]],
        f"NR {len(crs)}",
        f"UT WOS:{k + 1:015d}",
        "ER",
        "",
    ]
    return "\n".join(lines)


def wos_file(records):
    return "FN Clarivate Analytics Web of Science\nVR 1.0\n" + "".join(records) + "EF\n"


def parse_wos(text):
    """Independent counting pass over a written file."""
    recs, cur, tag = [], None, None
    for line in text.split("\n"):
        if line.startswith("  ") and cur is not None:
            if tag == "CR":
                cur["cr"].append(line.strip())
            continue
        tag, val = line[:2], line[3:].strip()
        if tag == "PT":
            cur = {"py": None, "cr": []}
        elif tag == "ER" and cur is not None:
            recs.append(cur)
            cur = None
        elif cur is not None and tag == "PY":
            cur["py"] = int(val)
        elif cur is not None and tag == "CR":
            cur["cr"].append(val)
    return recs


def stats(records):
    crs = [c for r in records for c in r["cr"]]
    distinct = sorted(set(crs))
    rpys = sorted({p["rpy"] for p in map(parse_cr, distinct) if p["rpy"] is not None})
    pys = sorted({r["py"] for r in records if r["py"] is not None})
    return {
        "total_nondistinct_crs": len(crs),
        "min_rpy": rpys[0],
        "max_rpy": rpys[-1],
        "n_citing_pubs": len(records),
        "min_citing_year": pys[0],
        "max_citing_year": pys[-1],
        "n_distinct_crs": len(distinct),
        "n_distinct_rpys": len(rpys),
        "n_distinct_citing_years": len(pys),
    }


def main():
    rng = random.Random(SEED)
    plain = plain_works(rng)
    weights = [w for g in GROUPS for w in g]
    weights += [(raw, PLAIN_HEAVY[i] if i < len(PLAIN_HEAVY) else 1) for i, raw in enumerate(plain)]
    assert sum(n for _, n in weights) == RECORDS * CR_PER_RECORD
    slots = allocate(weights, rng)
    texts = [record_text(k, s) for k, s in enumerate(slots)]

    files = {
        "corpus.txt": texts,
        "part1.txt": texts[0:10],
        "part2.txt": texts[10:20],
        "part3.txt": texts[20:30],
        "half1.txt": texts[0:15],
        "half2.txt": texts[15:30],
    }
    for name, recs in files.items():
        (OUT / name).write_text(wos_file(recs), encoding="utf-8", newline="\n")

    records = parse_wos((OUT / "corpus.txt").read_text(encoding="utf-8"))
    occurrences = {}
    for r in records:
        for c in r["cr"]:
            occurrences[c] = occurrences.get(c, 0) + 1
    comps = components(sorted(occurrences))
    groups = [c for c in comps if len(c) > 1]
    intended = sorted(sorted(raw for raw, _ in g) for g in GROUPS)
    assert groups == intended, "pairwise components differ from the designed groups"
    work_ncr = sorted((sum(occurrences[s] for s in c) for c in comps), reverse=True)

    manifest = {
        "files": {name: len(recs) for name, recs in files.items()},
        "cr_lines": sum(len(r["cr"]) for r in records),
        "distinct_strings": len(occurrences),
        "stats": stats(records),
        "variant_groups": groups,
        "group_sizes": sorted(len(g) for g in groups),
        "distinct_after_merge": len(comps),
        "max_work_ncr": work_ncr[0],
        "works_with_ncr_at_least": {str(k): sum(1 for n in work_ncr if n >= k) for k in (2, 5, 10)},
    }
    (OUT / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
