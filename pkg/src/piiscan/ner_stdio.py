"""Reference subprocess NER plugin speaking the stdio line protocol.

Run as ``python -m piiscan.ner_stdio [dictionary.json]`` and point
``piiscan scan --ner`` at that command. The optional JSON argument maps
entity types to phrase lists; without it only the capitalized-bigram
person-name rule runs. Real models in any runtime can replace this
script as long as they keep the frame format:

  stdin:  "<decimal payload length>\\n" followed by that many bytes
  stdout: "type\\tstart\\tend\\tconfidence" per entity, then a blank line
"""

from __future__ import annotations

import json
import sys

from .ner import MockNerPlugin


def serve(dictionaries: dict[str, list[str]]) -> None:
    plugin = MockNerPlugin(dictionaries)
    stdin = sys.stdin.buffer
    stdout = sys.stdout.buffer
    while True:
        header = stdin.readline()
        if not header:
            return
        try:
            length = int(header.strip())
        except ValueError:
            return
        payload = stdin.read(length)
        if payload is None or len(payload) < length:
            return
        for entity in plugin.analyze(payload):
            line = f"{entity.entity_type}\t{entity.start}\t{entity.end}\t{entity.confidence}\n"
            stdout.write(line.encode("utf-8"))
        stdout.write(b"\n")
        stdout.flush()


def main() -> None:
    dictionaries: dict[str, list[str]] = {}
    if len(sys.argv) > 1:
        with open(sys.argv[1], "r", encoding="utf-8") as fh:
            dictionaries = json.load(fh)
    serve(dictionaries)


if __name__ == "__main__":
    main()
