"""A third-party model as the audit engine sees it: an opaque process.

Speaks the JSON-lines protocol on stdin/stdout. One request per line:

    {"id": 1, "instances": [[v1, ..., vm], ...]}

and one response per line:

    {"id": 1, "predictions": [...], "scores": [[...], ...]}

Feature values arrive in schema order. The decision logic here is a plain
hand-written rule; the engine never finds out.
"""

import json
import sys


def decide(instance):
    (applicant, coapplicant, amount, years, credit, area, gender) = instance
    score = 0.9 * ((applicant + 0.6 * coapplicant) / 1000.0)
    score -= 1.1 * (amount / 100.0)
    score += 0.4 * years
    score += 18.0 if credit == "1" else 0.0
    score += {"urban": 2.0, "semiurban": 1.0, "rural": 0.0}[area]
    score -= 2.5 if gender == "female" else 0.0
    p_approved = 1.0 / (1.0 + pow(2.718281828, -(score - 38.0) / 4.0))
    label = "approved" if p_approved >= 0.5 else "rejected"
    return label, [1.0 - p_approved, p_approved]


def main():
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        request = json.loads(line)
        labels, scores = [], []
        for instance in request["instances"]:
            label, probs = decide(instance)
            labels.append(label)
            scores.append(probs)
        response = {"id": request["id"], "predictions": labels, "scores": scores}
        sys.stdout.write(json.dumps(response) + "\n")
        sys.stdout.flush()


if __name__ == "__main__":
    main()
