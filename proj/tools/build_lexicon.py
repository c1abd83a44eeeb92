#!/usr/bin/env python3
"""Compile the derivational substitution table from a WNDB-format database.

Reads data.noun / data.verb / data.adj / data.adv plus the corresponding
index.* files from a dictionary directory (e.g. the English WordNet 2020
release) and emits one line per surface lemma:

    lemma<TAB>pos<TAB>related_lemma/pos;related_lemma/pos;...

keeping only "+" (derivationally related form) pointers.  The harness
consumes the table as-is; substitution later filters to cross-POS forms.

Usage: build_lexicon.py DICT_DIR [-o OUT] [--include-inflections TSV]

The optional inflections file maps surface forms to lemmas (one
"surface<TAB>lemma" pair per line) so that inflected corpus targets such
as "appealed" inherit the entry of their lemma.
"""

import argparse
import sys
from collections import defaultdict
from pathlib import Path

POS_FILES = {"n": "data.noun", "v": "data.verb", "a": "data.adj", "r": "data.adv"}
# ss_type in data files: satellite adjectives count as adjectives
SS_TO_POS = {"n": "n", "v": "v", "a": "a", "s": "a", "r": "r"}


def parse_data_file(path, pos):
    """Yield (offset, [words], [(ptr_symbol, target_offset, target_pos, src, tgt)])."""
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith(" ") or not line.strip():
                continue  # license header lines are space-indented
            head, _, _gloss = line.partition("|")
            fields = head.split()
            offset = fields[0]
            w_cnt = int(fields[3], 16)
            words = []
            i = 4
            for _ in range(w_cnt):
                words.append(fields[i].replace("_", " "))
                i += 2  # skip lex_id
            p_cnt = int(fields[i])
            i += 1
            pointers = []
            for _ in range(p_cnt):
                sym, toff, tpos, st = fields[i], fields[i + 1], fields[i + 2], fields[i + 3]
                src = int(st[:2], 16)
                tgt = int(st[2:], 16)
                pointers.append((sym, toff, SS_TO_POS.get(tpos, tpos), src, tgt))
                i += 4
            yield offset, words, pointers


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("dict_dir", type=Path)
    ap.add_argument("-o", "--out", type=Path, default=Path("lexicon.tsv"))
    ap.add_argument("--include-inflections", type=Path, default=None)
    args = ap.parse_args()

    # first pass: remember every synset's word list so pointer targets resolve
    synsets = {}
    for pos, fname in POS_FILES.items():
        fpath = args.dict_dir / fname
        if not fpath.exists():
            sys.exit(f"missing {fpath}")
        for offset, words, pointers in parse_data_file(fpath, pos):
            synsets[(pos, offset)] = (words, pointers)

    related = defaultdict(set)  # (lemma, pos) -> {(lemma, pos)}
    for (pos, _offset), (words, pointers) in synsets.items():
        for sym, toff, tpos, src, tgt in pointers:
            if sym != "+":
                continue
            target = synsets.get((tpos, toff))
            if target is None:
                continue
            twords = target[0]
            # src/tgt are 1-based word numbers; 0 means "all words"
            src_words = words if src == 0 else words[src - 1 : src]
            tgt_words = twords if tgt == 0 else twords[tgt - 1 : tgt]
            for sw in src_words:
                for tw in tgt_words:
                    related[(sw.lower(), pos)].add((tw.lower(), tpos))

    if args.include_inflections:
        for line in args.include_inflections.read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            surface, _, lemma = line.partition("\t")
            surface, lemma = surface.strip().lower(), lemma.strip().lower()
            for pos in POS_FILES:
                if (lemma, pos) in related:
                    related[(surface, pos)] |= related[(lemma, pos)]

    with open(args.out, "w", encoding="utf-8") as out:
        out.write("# derivational substitution table: surface form <TAB> pos <TAB> related lemma/pos list\n")
        for (lemma, pos) in sorted(related):
            forms = ";".join(f"{w}/{p}" for w, p in sorted(related[(lemma, pos)]))
            out.write(f"{lemma}\t{pos}\t{forms}\n")
    print(f"wrote {len(related)} entries to {args.out}")


if __name__ == "__main__":
    main()
