#!/usr/bin/env python3
"""Brute-force recomputation of the comparison and audit reports.

Reads the TSV snapshots directly and recomputes every number with plain
loops. Shares no code with the Rust crates.

    python3 fixtures/oracle/brute_force_report.py          # rewrite goldens
    python3 fixtures/oracle/brute_force_report.py --check  # compare only
"""

import json
import os
import sys
import unicodedata

FIXTURES = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
GOLDEN = os.path.join(FIXTURES, "golden")

AUTHORS = ["Anna Adler", "Bruno Bränd", "Clara Conti"]
ISSN = "0138-9130"
FIRST, LAST = 2010, 2014
SCHEME = (50.0, 80.0, 90.0)


def norm(s):
    out = []
    for ch in unicodedata.normalize("NFKD", s):
        if unicodedata.combining(ch):
            continue
        ch = ch.lower()
        out.append(ch if ch.isalnum() else " ")
    return " ".join("".join(out).split())


def rows(snapshot, name):
    path = os.path.join(snapshot, name)
    if not os.path.exists(path):
        return []
    with open(path, encoding="utf-8") as f:
        return [[None if c == "\\N" else c for c in line.rstrip("\n").split("\t")]
                for line in f if line.strip()]


def load(snapshot):
    papers = {}
    for r in rows(snapshot, "papers.tsv"):
        papers[int(r[0])] = {
            "title": norm(r[1]),
            "year": None if r[3] is None else int(r[3]),
            "cc": int(r[5]),
            "journal": None if r[7] is None else int(r[7]),
            "authors": [],
        }
    for r in rows(snapshot, "paper_authors.tsv"):
        papers[int(r[0])]["authors"].append(norm(r[2]))
    journals = {int(r[0]): r[2] for r in rows(snapshot, "journals.tsv")}
    return papers, journals


def journal_by_issn(journals, issn):
    hits = [j for j, i in journals.items() if i == issn]
    assert len(hits) == 1
    return hits[0]


def pr_class(p):
    if p >= SCHEME[2]:
        return 4
    if p >= SCHEME[1]:
        return 3
    if p >= SCHEME[0]:
        return 2
    return 1


def percentile(c, pool):
    if c == 0:
        return 0.0
    fewer = 0
    for x in pool:
        if x < c:
            fewer += 1
    return 100.0 * fewer / len(pool)


def report(snapshot, label):
    papers, journals = load(snapshot)
    jid = journal_by_issn(journals, ISSN)
    cells = {y: [] for y in range(FIRST, LAST + 1)}
    for p in papers.values():
        if p["journal"] == jid and p["year"] is not None and FIRST <= p["year"] <= LAST:
            cells[p["year"]].append(p["cc"])
    pooled = [c for y in cells for c in cells[y]]
    means = {y: sum(v) / len(v) for y, v in cells.items()}

    authors = []
    for name in AUTHORS:
        key = norm(name)
        pubs = [(pid, p) for pid, p in papers.items()
                if p["journal"] == jid and p["year"] is not None
                and FIRST <= p["year"] <= LAST and key in p["authors"]]
        pubs.sort(key=lambda item: (item[1]["year"], item[0]))
        ratios = [p["cc"] / means[p["year"]] for _, p in pubs]
        jncs = sum(ratios) / len(ratios)
        classes = [pr_class(percentile(p["cc"], pooled)) for _, p in pubs]
        shares = {str(k): 100.0 * classes.count(k) / len(classes) for k in (4, 3, 2, 1)}
        authors.append({
            "author": name,
            "jncs": jncs,
            "pr_shares": shares,
            "n_scored": len(pubs),
            "publications": [
                {"id": pid, "year": p["year"], "citations": p["cc"],
                 "percentile": percentile(p["cc"], pooled), "class": c}
                for (pid, p), c in zip(pubs, classes)
            ],
        })
    # dense rank by descending JNCS
    distinct = sorted({a["jncs"] for a in authors}, reverse=True)
    for a in authors:
        a["rank"] = distinct.index(a["jncs"]) + 1
    return {
        "label": label,
        "journal_id": jid,
        "reference_set": {
            "size": len(pooled),
            "cells": [{"year": y, "size": len(cells[y]), "mean": means[y]} for y in cells],
        },
        "authors": authors,
    }


def audit(dir_a, dir_b, author):
    a, _ = load(dir_a)
    b, _ = load(dir_b)
    by_title = {}
    for pid, p in b.items():
        by_title.setdefault(p["title"], []).append(pid)
    pairs = []
    for pid, p in sorted(a.items()):
        hits = by_title.get(p["title"], [])
        assert len(hits) == 1
        pairs.append((pid, hits[0]))
    shifted = [(x, y, b[y]["year"] - a[x]["year"]) for x, y in pairs
               if a[x]["year"] != b[y]["year"]]
    key = norm(author)
    own = [(x, y) for x, y in pairs if key in a[x]["authors"] or key in b[y]["authors"]]
    listed_a = sum(1 for x, _ in own if key in a[x]["authors"])
    listed_b = sum(1 for _, y in own if key in b[y]["authors"])
    return {
        "matched": len(pairs),
        "year_mismatches": len(shifted),
        "year_mismatch_rate": 100.0 * len(shifted) / len(pairs),
        "deltas": sorted({d for _, _, d in shifted}),
        "author": author,
        "author_pairs": len(own),
        "percent_a": 100.0 * listed_a / len(own),
        "percent_b": 100.0 * listed_b / len(own),
        "missing_percent_a": 100.0 * (len(own) - listed_a) / len(own),
    }


def compute():
    mini = os.path.join(FIXTURES, "scientometrics-mini")
    ma = report(os.path.join(mini, "ma"), "MA")
    scopus = report(os.path.join(mini, "scopus"), "Scopus")
    compare = {"years": [FIRST, LAST], "scheme": "50,80,90", "pool": "pooled",
               "databases": [ma, scopus]}
    audit57 = audit(os.path.join(FIXTURES, "audit-57", "a"),
                    os.path.join(FIXTURES, "audit-57", "b"), "Clara Conti")
    return {"compare_mini.json": compare, "audit57.json": audit57}


def check_design(compare):
    """The fixture story: A strong, B and C weak and swapping ranks."""
    ok = True
    for db in compare["databases"]:
        a, b, c = db["authors"]
        ok &= a["jncs"] > 1.0 and a["pr_shares"]["4"] > 0
        ok &= b["pr_shares"]["4"] == 0 and c["pr_shares"]["4"] == 0
        ok &= a["rank"] == 1
    ma, sc = compare["databases"]
    ok &= ma["authors"][1]["rank"] == 2 and ma["authors"][2]["rank"] == 3
    ok &= sc["authors"][1]["rank"] == 3 and sc["authors"][2]["rank"] == 2
    ok &= ma["reference_set"]["size"] == 130
    return ok


def main():
    goldens = compute()
    if not check_design(goldens["compare_mini.json"]):
        print(json.dumps(goldens["compare_mini.json"], indent=1, ensure_ascii=False)[:3000])
        sys.exit("fixture does not satisfy the scripted design")
    check = "--check" in sys.argv
    os.makedirs(GOLDEN, exist_ok=True)
    status = 0
    for name, value in goldens.items():
        text = json.dumps(value, indent=2, ensure_ascii=False) + "\n"
        path = os.path.join(GOLDEN, name)
        if check:
            with open(path, encoding="utf-8") as f:
                if f.read() != text:
                    print(f"{name}: differs")
                    status = 1
        else:
            with open(path, "w", encoding="utf-8") as f:
                f.write(text)
    sys.exit(status)


if __name__ == "__main__":
    main()
