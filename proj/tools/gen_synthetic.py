#!/usr/bin/env python3
"""Writes the small offline corpus and scripted-agent fixture table used by the
tests and the sample config.

    python3 tools/gen_synthetic.py [--out data/synthetic]

Every task gets a short chain of Python revisions. Four chain shapes rotate
through the corpus so runs see broken intermediate code, runtime failures,
TODO leftovers and review caps.
"""

import argparse
import json
import pathlib

TASKS = [
    # (category, slug, requirement, body)
    ("arithmetic", "sum-range", "Print the sum of the integers from 1 to 100.",
     "total = sum(range(1, 101))\nprint(total)\n"),
    ("arithmetic", "factorial", "Print the factorial of 10 computed with a loop.",
     "result = 1\nfor n in range(2, 11):\n    result *= n\nprint(result)\n"),
    ("arithmetic", "primes", "Print every prime number below 50 on one line.",
     "primes = [n for n in range(2, 50) if all(n % d for d in range(2, int(n ** 0.5) + 1))]\n"
     "print(' '.join(map(str, primes)))\n"),
    ("arithmetic", "fizzbuzz", "Print FizzBuzz for the numbers 1 to 30.",
     "for n in range(1, 31):\n    out = ('Fizz' if n % 3 == 0 else '') + ('Buzz' if n % 5 == 0 else '')\n"
     "    print(out or n)\n"),
    ("text", "reverse-words", "Reverse the order of words in the sentence 'the quick brown fox' and print it.",
     "sentence = 'the quick brown fox'\nprint(' '.join(reversed(sentence.split())))\n"),
    ("text", "vowel-count", "Count the vowels in the phrase 'experience refinement' and print the count.",
     "phrase = 'experience refinement'\nprint(sum(1 for c in phrase if c in 'aeiou'))\n"),
    ("text", "palindrome", "Print whether the word 'level' is a palindrome.",
     "word = 'level'\nprint(word == word[::-1])\n"),
    ("text", "word-freq", "Print the frequency of each word in 'a b a c b a' sorted by word.",
     "from collections import Counter\ncounts = Counter('a b a c b a'.split())\n"
     "for word in sorted(counts):\n    print(word, counts[word])\n"),
    ("lists", "max-min", "Print the largest and smallest values of the list 4 9 1 7 3.",
     "values = [4, 9, 1, 7, 3]\nprint(max(values), min(values))\n"),
    ("lists", "dedupe", "Remove duplicates from 3 1 3 2 1 keeping first occurrences and print the list.",
     "seen = []\nfor v in [3, 1, 3, 2, 1]:\n    if v not in seen:\n        seen.append(v)\nprint(seen)\n"),
    ("lists", "flatten", "Flatten the nested list [[1, 2], [3], [4, 5]] and print it.",
     "nested = [[1, 2], [3], [4, 5]]\nprint([x for part in nested for x in part])\n"),
    ("lists", "running-mean", "Print the running mean of the list 2 4 6 8.",
     "values = [2, 4, 6, 8]\ntotal = 0\nfor i, v in enumerate(values, 1):\n    total += v\n"
     "    print(total / i)\n"),
    ("games", "dice-table", "Print a table of all outcomes of rolling two dice with their sums.",
     "for a in range(1, 7):\n    print(' '.join(str(a + b) for b in range(1, 7)))\n"),
    ("games", "tic-tac-toe-board", "Print an empty tic-tac-toe board drawn with ASCII characters.",
     "row = ' | '.join([' '] * 3)\nprint(('\\n' + '-' * 9 + '\\n').join([row] * 3))\n"),
    ("games", "guess-check", "Check the guesses 10 50 42 against the secret 42 and print hints.",
     "secret = 42\nfor guess in [10, 50, 42]:\n    print('low' if guess < secret else 'high' if guess > secret "
     "else 'correct')\n"),
    ("games", "coin-streak", "Print the longest streak of heads in the flips H T H H H T H.",
     "flips = 'H T H H H T H'.split()\nbest = run = 0\nfor f in flips:\n    run = run + 1 if f == 'H' else 0\n"
     "    best = max(best, run)\nprint(best)\n"),
]


def program(requirement, body, note=""):
    text = f'"""{requirement}"""\n\n{body}'
    if note:
        text = f"# {note}\n" + text
    return text


def reply(code):
    return f"main.py\n```python\n{code}```\n"


def turns_for(index, requirement, body):
    """Returns the scripted turns of one task as (phase, round, instruction, code or None)."""
    stub = program(requirement, "# TODO: implement\npass\n")
    broken = program(requirement, body.replace("print(", "print((", 1))
    crash = program(requirement, "raise RuntimeError('not finished')\n" + body)
    done = "<INFO> Finished"
    shape = index % 4
    if shape == 0:
        return [
            ("coding", 1, f"Write a first version: {requirement}", stub),
            ("review", 1, "Replace the placeholder with a working implementation.", program(requirement, body)),
            ("review", 2, done, None),
            ("test", 1, "Run the program and confirm the output.", program(requirement, body, "checked")),
        ]
    if shape == 1:
        return [
            ("coding", 1, f"Implement the requirement directly: {requirement}", broken),
            ("review", 1, "Fix the syntax error reported by the compiler.", program(requirement, body)),
            ("review", 2, "Add a short comment describing the approach.", program(requirement, body, "direct approach")),
            ("review", 3, done, None),
            ("test", 1, "Execute the program once.", program(requirement, body, "direct approach")),
        ]
    if shape == 2:
        return [
            ("coding", 1, f"Implement: {requirement}", crash),
            ("review", 1, done, None),
            ("test", 1, "Run the program and report errors.", crash),
            ("test", 2, "Remove the exception raised at start-up.", program(requirement, body)),
        ]
    return [
        ("coding", 1, f"Sketch the program structure for: {requirement}", stub),
        ("review", 1, "Fill in the main logic.", program(requirement, body + "# TODO: handle bad input\n")),
        ("review", 2, "Print results in the requested format.", program(requirement, body + "# TODO: handle bad input\n")),
        ("review", 3, "Keep the program as small as possible.", program(requirement, body + "# TODO: handle bad input\n")),
        ("test", 1, "Run it.", program(requirement, body + "# TODO: handle bad input\n")),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data" / "synthetic"))
    args = parser.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    corpus, fixtures = [], []
    for i, (category, slug, requirement, body) in enumerate(TASKS):
        task_id = f"{category[:3]}-{slug}"
        corpus.append({"task_id": task_id, "category": category, "task_text": requirement})
        nodes = 1
        for phase, rnd, instruction, code in turns_for(i, requirement, body):
            entry = {"task_id": task_id, "phase": phase, "round": rnd, "instruction": instruction}
            if code is not None:
                entry["reply"] = reply(code)
                nodes += 1
            fixtures.append(entry)
        for source in range(nodes):
            for target in range(source + 2, nodes):
                origin = "the requirement" if source == 0 else f"revision {source}"
                fixtures.append({"task_id": task_id, "phase": "pseudo", "source": source, "target": target,
                                 "instruction": f"Starting from {origin}, produce revision {target} of the "
                                                f"program that does this: {requirement}"})

    def dump(name, rows):
        with open(out / name, "w", encoding="utf-8") as f:
            for row in rows:
                f.write(json.dumps(row, sort_keys=True) + "\n")

    dump("corpus.jsonl", corpus)
    dump("fixtures.jsonl", fixtures)
    print(f"wrote {len(corpus)} tasks and {len(fixtures)} fixture entries to {out}")


if __name__ == "__main__":
    main()
