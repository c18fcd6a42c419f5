"""Regenerates the demo corpus. Deterministic; run from this directory."""
import csv
import json
import random
from datetime import datetime, timedelta, timezone

rng = random.Random(20200601)

FAKE = [f"f{i:02d}" for i in range(1, 21)]
REAL = [f"r{i:02d}" for i in range(1, 21)]

# Distinct fake stories shared per user. Users u01-u10 share none.
FAKE_COUNTS = (
    [0] * 10       # u01-u10
    + [1] * 10     # u11-u20
    + [2] * 5      # u21-u25
    + [3] * 10     # u26-u35
    + [4] * 7      # u36-u42
    + [5] * 5      # u43-u47
    + [6] * 3      # u48-u50
)

FILLER = ("the a we they people today news story read this that about here "
          "think know see go time government vote city water health school "
          "team game movie star show money work night week").split()
CUES = {
    "tentat": ["maybe", "perhaps", "guess"],
    "discrep": ["should", "would", "could"],
    "certain": ["always", "never"],
    "anx": ["nervous", "afraid", "tense"],
    "futurefocus": ["may", "will", "soon"],
}
DECOR = ["https://t.co/abc{}", "#breaking", "@friend{}", "wow!", "can't", "(really)", "www.site{}.com", "100%"]

BASE = datetime(2020, 1, 1, tzinfo=timezone.utc)


def sentence(cue_bias):
    n = rng.randint(6, 30)
    words = []
    for _ in range(n):
        r = rng.random()
        if r < cue_bias:
            cat = rng.choice(sorted(CUES))
            words.append(rng.choice(CUES[cat]).capitalize() if rng.random() < 0.2 else rng.choice(CUES[cat]))
        elif r < cue_bias + 0.08:
            words.append(rng.choice(DECOR).format(rng.randint(0, 99)))
        else:
            words.append(rng.choice(FILLER))
    return " ".join(words) + rng.choice([".", "!", "?", ""])


tweets = []
users = []
tid = 0


def emit(user, text, news_id, when):
    global tid
    tid += 1
    tweets.append({
        "tweet_id": f"t{tid:04d}",
        "user_id": user,
        "text": text,
        "created_at": when.strftime("%Y-%m-%dT%H:%M:%SZ"),
        "retweet_count": rng.randint(0, 40),
        "like_count": rng.randint(0, 120),
        "news_id": news_id,
    })


for i, k in enumerate(FAKE_COUNTS, start=1):
    user = f"u{i:02d}"
    bias = 0.05 + 0.03 * k
    shares = []
    shares += rng.sample(FAKE, k)
    if i > 5:
        shares += rng.sample(REAL, rng.randint(1, 3))
    if user == "u15":
        shares += [shares[0], shares[0]]  # one fake story shared three times
    if user == "u22":
        shares += [shares[0], shares[1]]
    plain = rng.randint(2, 7)
    items = [(s, sentence(bias) + f" https://news.example/{s}") for s in shares]
    items += [(None, sentence(bias)) for _ in range(plain)]
    rng.shuffle(items)
    for news_id, text in items:
        when = BASE + timedelta(minutes=rng.randint(0, 150 * 24 * 60))
        emit(user, text, news_id, when)
    if user != "u50":
        created = datetime(2010, 1, 1, tzinfo=timezone.utc) + timedelta(days=rng.randint(0, 3600))
        users.append({
            "user_id": user,
            "followers_count": rng.randint(0, 5000),
            "followees_count": rng.randint(0, 2000),
            "statuses_count": rng.randint(10, 40000),
            "account_created_at": created.strftime("%Y-%m-%dT%H:%M:%SZ"),
        })

# a story with no veracity label
emit("u03", "look at this https://news.example/x99", "x99", BASE + timedelta(days=3))

rng.shuffle(tweets)
with open("tweets.jsonl", "w") as f:
    for t in tweets:
        f.write(json.dumps(t) + "\n")
with open("users.jsonl", "w") as f:
    for u in users:
        f.write(json.dumps(u) + "\n")
with open("labels.csv", "w", newline="") as f:
    w = csv.writer(f, lineterminator="\n")
    w.writerow(["news_id", "veracity"])
    for n in FAKE:
        w.writerow([n, "fake"])
    for n in REAL:
        w.writerow([n, "real"])
with open("lexicon.txt", "w") as f:
    f.write("# Example words for the five motivational categories.\n")
    for cat in ["discrep", "tentat", "certain", "anx", "futurefocus"]:
        f.write(f"[{cat}]\n" + "\n".join(CUES[cat]) + "\n\n")
