#!/usr/bin/env python3
"""Regenerate the bundled snapshot fixtures.

    python3 fixtures/generate.py

Output is deterministic. Snapshots written:

  scientometrics-mini/ma      130 papers of one journal, 2010-2014, three
                              scripted researchers, L0/L1/L2 fields of study
  scientometrics-mini/scopus  the same papers under other ids plus 9 extra,
                              different citation counts, a few shifted years
  audit-57/a, audit-57/b      57 paired publications; 11 years shifted by one;
                              one author listed on only 9 of 25 papers in a
"""

import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))
NULL = "\\N"

YEARS = list(range(2010, 2015))
JOURNAL_MA = (1, "Scientometrics", "0138-9130")
JOURNAL_SCOPUS = (28100, "SCIENTOMETRICS", "0138-9130")
OTHER_JOURNAL = (2, "Journal of Informetrics", "1751-1577")

RESEARCHERS = {
    "A": (501, "Anna Adler", 9001, "University of Zurich"),
    "B": (502, "Bruno Bränd", 9002, "ETH Zürich"),
    "C": (503, "Clara Conti", 9003, "FORS Lausanne"),
}

L0_FIELDS = [
    "Art", "Biology", "Business", "Chemistry", "Computer Science", "Economics",
    "Engineering", "Environmental Science", "Geography", "Geology", "History",
    "Materials Science", "Mathematics", "Philosophy", "Physics",
    "Political Science", "Psychology", "Sociology",
]
# (id, name, level, parents)
OTHER_FIELDS = [
    (200, "Social Sciences", "L1", ["Psychology", "Sociology"]),
    (201, "Library Science", "L1", ["Computer Science"]),
    (202, "Insurance score", "L1", ["Economics"]),
    (300, "Bibliometrics", "L2", ["Library Science"]),
    (301, "Citation analysis", "L2", ["Library Science"]),
]

TOPIC_A = ["Citation", "Collaboration", "Funding", "Gender", "Patent", "Altmetric",
           "Journal", "Peer review", "Mobility", "Open access", "Impact", "Network"]
TOPIC_B = ["dynamics", "patterns", "indicators", "effects", "structures", "bias",
           "growth", "networks", "rankings", "signals", "flows"]
TOPIC_C = ["in physics", "in the social sciences", "across disciplines",
           "in Switzerland", "in Europe", "in China", "at universities",
           "in medicine", "in the humanities", "over time", "in economics",
           "in computer science", "in Latin America"]
FIRST = ["Maria", "Jonas", "Lea", "Noah", "Elena", "Luca", "Sofia", "David",
         "Mia", "Pavel", "Ines", "Kenji", "Olga", "Rafael", "Zoë", "Tomás"]
LAST = ["Keller", "Novak", "Rossi", "Schmid", "Weber", "Dubois", "Huber",
        "Müller", "Nakamura", "García", "Olsen", "Petrov", "Meier", "Brun"]


def fmt(v):
    return NULL if v is None else str(v)


def write_tsv(path, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for row in rows:
            f.write("\t".join(fmt(v) for v in row) + "\n")


def titles(n, rng):
    combos = [f"{a} {b} {c}" for a in TOPIC_A for b in TOPIC_B for c in TOPIC_C]
    rng.shuffle(combos)
    return combos[:n]


def base_citations(rng, n):
    # skewed, with a block of uncited papers
    out = []
    for _ in range(n):
        r = rng.random()
        if r < 0.18:
            out.append(0)
        else:
            out.append(min(60, int(rng.paretovariate(1.3) * 2.2) - 1))
    return [max(0, c) for c in out]


# Researcher publications: (key, year, ma citations, scopus citations, scopus year)
MINI_RESEARCHER_PUBS = [
    ("A", 2010, 41, 44, 2010),
    ("A", 2011, 19, 17, 2011),
    ("A", 2012, 11, 12, 2012),
    ("A", 2012, 2, 3, 2012),
    ("A", 2013, 9, 10, 2013),
    ("A", 2014, 6, 5, 2014),
    ("A", 2014, 0, 1, 2014),
    ("B", 2010, 8, 5, 2010),
    ("B", 2011, 4, 2, 2011),
    ("B", 2011, 3, 3, 2012),
    ("B", 2012, 4, 3, 2012),
    ("B", 2013, 1, 1, 2013),
    ("B", 2014, 3, 2, 2014),
    ("B", 2014, 0, 0, 2014),
    ("C", 2010, 4, 6, 2010),
    ("C", 2011, 2, 4, 2011),
    ("C", 2012, 3, 5, 2013),
    ("C", 2013, 2, 3, 2013),
    ("C", 2014, 0, 2, 2014),
    ("C", 2014, 1, 1, 2014),
]


def mini():
    rng = random.Random(2016)
    per_year = 26
    n_total = per_year * len(YEARS)
    names = titles(n_total + 9, rng)
    field_ids = {name: 100 + i for i, name in enumerate(L0_FIELDS)}
    for fid, name, _, _ in OTHER_FIELDS:
        field_ids[name] = fid

    # layout: per year, researcher pubs first then fillers
    papers = []  # dicts
    by_year = {y: [r for r in MINI_RESEARCHER_PUBS if r[1] == y] for y in YEARS}
    idx = 0
    for y in YEARS:
        fillers = per_year - len(by_year[y])
        base = base_citations(rng, fillers)
        for key, _, cc_ma, cc_sc, y_sc in by_year[y]:
            papers.append(dict(key=key, year=y, cc=cc_ma, cc_sc=cc_sc, year_sc=y_sc, title=names[idx]))
            idx += 1
        for c in base:
            jitter = rng.choice([-1, 0, 0, 1, 2]) if c > 0 else rng.choice([0, 0, 0, 1])
            papers.append(dict(key=None, year=y, cc=c, cc_sc=max(0, c + jitter), year_sc=y, title=names[idx]))
            idx += 1
    assert len(papers) == n_total

    extra = []
    for i in range(9):
        y = YEARS[i % len(YEARS)]
        c = base_citations(rng, 1)[0]
        extra.append(dict(key=None, year=y, cc=None, cc_sc=c, year_sc=y, title=names[idx]))
        idx += 1

    def coauthors(seed_index):
        r = random.Random(seed_index)
        out = []
        for k in range(r.choice([1, 2, 2, 3])):
            first, last = r.choice(FIRST), r.choice(LAST)
            aid = 1000 + FIRST.index(first) * 100 + LAST.index(last)
            out.append((aid, f"{first} {last}", None, None))
        return out

    def emit(dirname, id_base, journal, use_scopus):
        os.makedirs(dirname, exist_ok=True)
        rows, authors, refs, fos = [], [], [], []
        pool = papers + (extra if use_scopus else [])
        ids = []
        for i, p in enumerate(pool):
            pid = id_base + i + 1
            ids.append(pid)
            year = p["year_sc"] if use_scopus else p["year"]
            cc = p["cc_sc"] if use_scopus else p["cc"]
            month, day = 1 + (i * 5) % 12, 1 + (i * 7) % 28
            doi = f"10.1007/s11192-{year % 100:03d}-{i + 1:04d}-{i % 10}"
            rows.append([pid, p["title"], p["title"], year, f"{year}-{month:02d}-{day:02d}",
                         cc, NULL if use_scopus else cc + (i % 3), journal[0], NULL,
                         80 + YEARS.index(year), 1 + i % 3, 100 + i * 17, 115 + i * 17,
                         doi.upper() if use_scopus else doi])
            pos = 1
            if p["key"]:
                aid, name, afid, afn = RESEARCHERS[p["key"]]
                authors.append([pid, aid, name, afid, afn, pos])
                pos += 1
            for aid, name, afid, afn in coauthors(i):
                authors.append([pid, aid, name, afid, afn, pos])
                pos += 1
            fos.append([pid, field_ids["Bibliometrics"]])
            if i % 4 == 0:
                fos.append([pid, field_ids["Computer Science"]])
            if i % 5 == 0:
                fos.append([pid, field_ids["Social Sciences"]])
        for i, pid in enumerate(ids):
            # cite a few earlier papers
            r = random.Random(i * 31 + 7)
            for j in sorted(set(r.sample(range(i), min(i, r.choice([0, 1, 2, 3]))))):
                refs.append([pid, ids[j]])
        write_tsv(os.path.join(dirname, "papers.tsv"), rows)
        write_tsv(os.path.join(dirname, "paper_authors.tsv"), authors)
        write_tsv(os.path.join(dirname, "references.tsv"), refs)
        write_tsv(os.path.join(dirname, "paper_fos.tsv"), fos)
        write_tsv(os.path.join(dirname, "journals.tsv"), [list(journal), list(OTHER_JOURNAL)])
        write_tsv(os.path.join(dirname, "venues.tsv"),
                  [[3, "International Conference on Scientometrics and Informetrics",
                    "International Conference on Scientometrics and Informetrics", "ISSI"]])
        fos_rows = [[field_ids[n], n, "L0"] for n in L0_FIELDS]
        fos_rows += [[fid, name, lvl] for fid, name, lvl, _ in OTHER_FIELDS]
        hier = []
        for fid, name, lvl, parents in OTHER_FIELDS:
            if name == "Social Sciences":
                # superordinate concept stored one level below its members
                for child in parents:
                    hier.append([field_ids[child], fid])
            else:
                for parent in parents:
                    hier.append([fid, field_ids[parent]])
        write_tsv(os.path.join(dirname, "fos.tsv"), fos_rows)
        write_tsv(os.path.join(dirname, "fos_hierarchy.tsv"), hier)

    root = os.path.join(HERE, "scientometrics-mini")
    emit(os.path.join(root, "ma"), 2_000_000_000, JOURNAL_MA, False)
    emit(os.path.join(root, "scopus"), 84_000_000_000, JOURNAL_SCOPUS, True)


def audit57():
    rng = random.Random(57)
    names = titles(57, rng)
    owners = ["A"] * 17 + ["B"] * 15 + ["C"] * 25
    shifted = set(range(3, 57, 5))  # 11 indices
    assert len(shifted) == 11
    c_indices = [i for i, o in enumerate(owners) if o == "C"]
    c_listed_in_a = set(c_indices[::3])  # 9 of 25
    assert len(c_listed_in_a) == 9

    def emit(dirname, id_base, side):
        os.makedirs(dirname, exist_ok=True)
        rows, authors = [], []
        for i, (title, owner) in enumerate(zip(names, owners)):
            pid = id_base + i + 1
            year = YEARS[i % 5]
            if side == "a" and i in shifted:
                year += 1 if i % 2 else -1
            cc = (i * 7) % 23
            rows.append([pid, title, title, year, NULL, cc, NULL, 1, NULL,
                         NULL, NULL, NULL, NULL, f"10.1007/s11192-0{i:02d}-{i:04d}-1"])
            pos = 1
            aid, name, afid, afn = RESEARCHERS[owner]
            if not (side == "a" and owner == "C" and i not in c_listed_in_a):
                authors.append([pid, aid, name, afid, afn, pos])
                pos += 1
            authors.append([pid, 7000 + i % 4, ["Lea Keller", "Noah Huber", "Mia Rossi", "Pavel Novak"][i % 4],
                            NULL, NULL, pos])
        write_tsv(os.path.join(dirname, "papers.tsv"), rows)
        write_tsv(os.path.join(dirname, "paper_authors.tsv"), authors)
        write_tsv(os.path.join(dirname, "journals.tsv"), [list(JOURNAL_MA)])

    root = os.path.join(HERE, "audit-57")
    emit(os.path.join(root, "a"), 3_000_000, "a")
    emit(os.path.join(root, "b"), 5_000_000, "b")


if __name__ == "__main__":
    mini()
    audit57()
