"""Independent recomputation of the demo feature matrix.

Writes golden_features.csv for threshold 3, 150 target words and reference
time 2020-06-01T00:00:00Z. Sums are accumulated left to right so values
match a straightforward f64 implementation.
"""
import csv
import json
import unicodedata
from datetime import datetime, timezone

NOW = datetime(2020, 6, 1, tzinfo=timezone.utc)
THRESHOLD = 3
TARGET = 150
CATS = ["tentat", "discrep", "certain", "anx", "futurefocus"]


def parse_time(s):
    return datetime.fromisoformat(s.replace("Z", "+00:00"))


def tokenize(text):
    out = []
    for raw in text.split():
        low = raw.lower()
        if raw.startswith("#") or raw.startswith("@") or low.startswith("www."):
            continue
        cuts = [p for p in (low.find("http://"), low.find("https://")) if p >= 0]
        if cuts:
            raw = raw[: min(cuts)]
        kept = "".join(c for c in raw if unicodedata.category(c)[0] not in "PS").lower()
        if kept:
            out.append(kept)
    return out


def read_lexicon(path):
    cats, cur = {}, None
    for line in open(path):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            cur = line[1:-1].lower()
            cats[cur] = []
        else:
            cats[cur].append(line.lower())
    return cats


def matches(tok, pats):
    for p in pats:
        if p.endswith("*"):
            if tok.startswith(p[:-1]):
                return True
        elif tok == p:
            return True
    return False


def mean(xs):
    s = 0.0
    for x in xs:
        s += x
    return s / len(xs)


tweets = [json.loads(l) for l in open("tweets.jsonl") if l.strip()]
users = {}
for l in open("users.jsonl"):
    if l.strip():
        u = json.loads(l)
        users[u["user_id"]] = u
labels = {}
with open("labels.csv") as f:
    for row in list(csv.reader(f))[1:]:
        labels[row[0]] = row[1].lower()
lex = read_lexicon("lexicon.txt")

by_user = {}
for t in tweets:
    by_user.setdefault(t["user_id"], []).append(t)

rows = []
for uid in sorted(by_user):
    ts = by_user[uid]
    fakes = {t["news_id"] for t in ts if t["news_id"] and labels.get(t["news_id"]) == "fake"}
    label = "fake" if len(fakes) >= THRESHOLD else "real"

    ordered = sorted(ts, key=lambda t: t["tweet_id"])
    ordered = sorted(ordered, key=lambda t: parse_time(t["created_at"]), reverse=True)
    doc, words = [], 0
    for t in ordered:
        if words >= TARGET:
            break
        words += len(t["text"].split())
        doc.append(t)

    vals, mask = [], []
    for cat in CATS:
        rates = []
        for t in doc:
            toks = tokenize(t["text"])
            if not toks:
                rates.append(0.0)
                continue
            n = 0
            for tok in toks:
                if matches(tok, lex[cat]):
                    n += 1
            rates.append(100.0 * float(n) / float(len(toks)))
        vals.append(mean(rates))
        mask.append("0")

    u = users.get(uid)
    if u is None:
        vals += [0.0, 0.0, 0.0]
        mask += ["1", "1", "1"]
    else:
        days = max(1, (NOW - parse_time(u["account_created_at"])).days)
        vals += [float(u["statuses_count"]) / float(days), float(u["followees_count"]), float(u["followers_count"])]
        mask += ["0", "0", "0"]

    news = [t for t in ts if t["news_id"] in labels]
    if news:
        vals.append(mean([float(t["retweet_count"]) for t in news]) - mean([float(t["retweet_count"]) for t in ts]))
        vals.append(mean([float(t["like_count"]) for t in news]) - mean([float(t["like_count"]) for t in ts]))
        mask += ["0", "0"]
    else:
        vals += [0.0, 0.0]
        mask += ["1", "1"]
    rows.append([uid, label] + [repr(v) for v in vals] + ["".join(mask)])

with open("golden_features.csv", "w", newline="") as f:
    w = csv.writer(f, lineterminator="\n")
    w.writerow(["user_id", "label"] + ["tentat", "discrep", "certain", "anx", "futurefocus",
                "engagement", "influence", "popularity", "boost_rt", "boost_like", "mask"])
    w.writerows(rows)
