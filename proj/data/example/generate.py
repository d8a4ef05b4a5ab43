"""Regenerates the synthetic example corpora and substitute lexicon."""
import json
import random

rng = random.Random(20191)

SENSES = {
    "for": [("Beneficiary", ["bought a gift for", "cooked dinner for", "sang a song for"], ["my sister", "the kids", "our guests"]),
            ("Purpose", ["went out for", "stopped by for", "came in for"], ["lunch", "a checkup", "coffee"]),
            ("Duration", ["waited for", "stayed for", "talked for"], ["an hour", "two days", "a week"]),
            ("Goal|Locus", ["left for", "headed out for", "set off for"], ["the coast", "Paris", "the office"])],
    "from": [("Source", ["drove home from", "walked back from", "flew in from"], ["the airport", "Boston", "work"]),
             ("Originator", ["got a letter from", "heard back from", "received a call from"], ["the bank", "my landlord", "the clinic"]),
             ("StartTime", ["worked from", "was open from", "studied from"], ["nine", "dawn", "Monday"])],
    "in": [("Locus", ["stayed", "ate lunch", "waited"], ["the lobby", "the park", "the kitchen"]),
           ("Goal|Locus", ["put the keys", "threw the letter", "dropped the coin"], ["the drawer", "the bin", "the fountain"]),
           ("Time", ["arrived", "moved out", "graduated"], ["May", "the spring", "2015"]),
           ("Manner", ["spoke", "answered", "wrote"], ["a hurry", "French", "pencil"])],
    "to": [("Goal", ["drove", "walked", "sent the package"], ["the store", "the station", "my office"]),
           ("Recipient", ["gave the book", "wrote a note", "handed the form"], ["the teacher", "my boss", "the clerk"]),
           ("Theme", ["agreed", "wanted", "decided"], None)],
    "with": [("Instrument", ["cut the bread", "fixed the chair", "paid"], ["a knife", "glue", "cash"]),
             ("Co-Agent", ["had dinner", "went hiking", "argued"], ["my brother", "friends", "the manager"]),
             ("Characteristic", ["rented a room", "found a house", "bought a car"], ["a view", "a garden", "leather seats"]),
             ("Manner", ["listened", "waited", "smiled"], ["patience", "care", "delight"])],
}
SUBJECTS = ["I", "We", "She", "They", "He", "My neighbor"]
VERBS_TO = ["leave", "rest", "help", "try again"]
LEXICON = {
    "for": {"Beneficiary": ["on behalf of", "to"], "Purpose": ["to get", "to have"], "Duration": ["during", "throughout"],
            "Goal|Locus": ["toward", "to", "into"]},
    "from": {"Source": ["out of", "away from"], "Originator": ["by", "sent by"], "StartTime": ["since", "starting at"]},
    "in": {"Locus": ["inside", "within", "at"], "Goal|Locus": ["into", "for", "with"], "Time": ["during", "at"],
           "Manner": ["using", "with"]},
    "to": {"Goal": ["toward", "into"], "Recipient": ["for"], "Theme": ["about"]},
    "with": {"Instrument": ["using", "by means of"], "Co-Agent": ["alongside", "together with"],
             "Characteristic": ["having", "that has"], "Manner": ["using", "in"]},
}


def sentence(lemma, label, frames, objects):
    subject = rng.choice(SUBJECTS)
    frame = rng.choice(frames)
    if objects is None:
        tokens = f"{subject} {frame} to {rng.choice(VERBS_TO)} .".split()
        return tokens, tokens.index("to")
    words = f"{subject} {frame}".split()
    index = len(words)
    if lemma != "for" or frame.split()[-1] != "for":
        words.append(lemma)
    else:
        index -= 1
    tokens = words + rng.choice(objects).split() + ["."]
    return tokens, index


def corpus(doc_prefix, n_docs, per_doc):
    records = []
    for d in range(n_docs):
        for s in range(rng.randint(per_doc // 2, per_doc * 3 // 2)):
            lemma = rng.choice(sorted(SENSES))
            label, frames, objects = rng.choice(SENSES[lemma])
            tokens, index = sentence(lemma, label, frames, objects)
            assert tokens[index] == lemma, (tokens, index)
            records.append({"doc_id": f"{doc_prefix}{d:02d}", "sent_id": f"s{s:02d}", "tokens": tokens,
                            "targets": [{"index": index, "lemma": lemma, "label": label}]})
    return records


def targets():
    records = []
    for lemma in sorted(SENSES):
        for i in range(30):
            label, frames, objects = SENSES[lemma][i % len(SENSES[lemma])]
            tokens, index = sentence(lemma, label, frames, objects)
            records.append({"doc_id": f"eval-{lemma}", "sent_id": f"s{i:02d}", "tokens": tokens,
                            "targets": [{"index": index, "lemma": lemma, "label": label}]})
    return records


def dump(path, records):
    with open(path, "w") as f:
        for r in records:
            f.write(json.dumps(r) + "\n")


if __name__ == "__main__":
    dump("labeled.jsonl", corpus("train-", 12, 25))
    dump("targets.jsonl", targets())
    with open("lexicon.json", "w") as f:
        json.dump(LEXICON, f, indent=2, sort_keys=True)
        f.write("\n")
