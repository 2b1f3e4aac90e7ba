#!/usr/bin/env python3
"""Regenerates synthetic_faceacts.jsonl.

296 unique persuasion dialogs, 10,716 turns, and a fixed face-act label
histogram. Three conversations are also copied into a second
fold. Dialog acts use the MRDA basic tags and lean on the face act (questions
with hneg-, statements elsewhere). Text is drawn from label-flavored phrase
pools with cross-label noise, so a bag-of-words model learns something but
not everything.
"""
import json
import random
import sys
from pathlib import Path

HISTOGRAM = {
    "other": 4300, "hpos+": 2844, "spos+": 1589, "hneg-": 1073,
    "hpos-": 334, "hneg+": 305, "sneg+": 259, "spos-": 12, "sneg-": 0,
}
CONVERSATIONS = 296
TURNS = 10716
FOLDS = 5
DUPLICATED = 3

PHRASES = {
    "other": ["hello there", "hi how are you", "i am doing well", "good morning",
              "nice to meet you", "have a good day", "what is the weather like",
              "i just got home from work", "bye now", "it was nice chatting"],
    "hpos+": ["that is a great point", "thank you so much", "i agree with you",
              "you are very kind", "that is wonderful", "i really appreciate it",
              "you make a good case", "that sounds lovely"],
    "spos+": ["i often donate to charities", "i volunteer every weekend",
              "i care a lot about children", "i give blood every year",
              "my family always helps others", "i already support a few causes"],
    "hneg-": ["would you like to donate", "can you give some money",
              "please consider donating", "how much will you donate",
              "could you spare a dollar", "will you help the children"],
    "hpos-": ["that sounds like a scam", "i doubt your claims", "you are wrong about that",
              "that is not convincing", "i do not trust that"],
    "hneg+": ["you can donate any amount", "no pressure at all", "it is completely up to you",
              "feel free to decide later", "even a small amount is fine"],
    "sneg+": ["i am not sure", "i need to think about it", "i do not know this charity",
              "maybe another time", "i cannot afford it right now"],
    "spos-": ["sorry my mistake", "i was wrong earlier", "my apologies for that"],
    "sneg-": ["ok i will donate now"],
}
FILLER = ["well", "so", "really", "yes", "okay", "the", "charity", "money", "kids",
          "today", "save", "children", "maybe", "just", "think", "you", "i", "it"]

DA_WEIGHTS = {
    "hneg-": [("Question", 70), ("Statement", 26), ("FloorGrabber", 2), ("Disruption", 2)],
    "hpos+": [("Statement", 82), ("Question", 6), ("BackChannel", 8), ("Disruption", 4)],
    "spos+": [("Statement", 92), ("Question", 5), ("Disruption", 3)],
    "hneg+": [("Statement", 90), ("Question", 7), ("Disruption", 3)],
}
DEFAULT_DA = [("Statement", 78), ("Question", 14), ("BackChannel", 3), ("FloorGrabber", 2),
              ("Disruption", 3)]


def weighted(rng, pairs):
    total = sum(w for _, w in pairs)
    x = rng.uniform(0, total)
    for value, w in pairs:
        x -= w
        if x <= 0:
            return value
    return pairs[-1][0]


def utterance_text(rng, label, question):
    source = label if rng.random() < 0.8 else rng.choice([l for l in PHRASES if l != "sneg-"])
    words = rng.choice(PHRASES[source]).split()
    for _ in range(rng.randint(0, 4)):
        words.insert(rng.randint(0, len(words)), rng.choice(FILLER))
    text = " ".join(words)
    text = text[0].upper() + text[1:]
    return text + ("?" if question else rng.choice([".", ".", "!"]))


def main(out_path):
    rng = random.Random(20230501)
    lengths = [rng.randint(26, 46) for _ in range(CONVERSATIONS)]
    while sum(lengths) != TURNS:
        i = rng.randrange(CONVERSATIONS)
        step = 1 if sum(lengths) < TURNS else -1
        if 20 <= lengths[i] + step <= 52:
            lengths[i] += step

    labels = [label for label, n in HISTOGRAM.items() for _ in range(n)]
    rng.shuffle(labels)

    ids = [f"syn{n:04d}" for n in range(CONVERSATIONS)]
    folds = [i % FOLDS for i in range(CONVERSATIONS)]
    rng.shuffle(folds)

    conversations = []
    cursor = 0
    for cid, fold, length in zip(ids, folds, lengths):
        rows = []
        for turn in range(length):
            label = labels[cursor]
            cursor += 1
            da = weighted(rng, DA_WEIGHTS.get(label, DEFAULT_DA))
            rows.append({
                "conversation_id": cid,
                "turn": turn,
                "speaker": "ER" if turn % 2 == 0 else "EE",
                "text": utterance_text(rng, label, da == "Question"),
                "face_act": label,
                "dialog_act": da,
            })
        conversations.append((cid, fold, rows))

    entries = [(cid, fold, rows) for cid, fold, rows in conversations]
    for cid, fold, rows in rng.sample(conversations, DUPLICATED):
        entries.append((cid, (fold + 1 + rng.randrange(FOLDS - 1)) % FOLDS, rows))
    entries.sort(key=lambda e: (e[1], e[0]))

    with open(out_path, "w", encoding="utf-8", newline="\n") as out:
        for cid, fold, rows in entries:
            for row in rows:
                record = dict(row)
                record["fold"] = fold
                out.write(json.dumps(record, ensure_ascii=False, separators=(",", ":")) + "\n")


if __name__ == "__main__":
    target = sys.argv[1] if len(sys.argv) > 1 else Path(__file__).with_name("synthetic_faceacts.jsonl")
    main(target)
