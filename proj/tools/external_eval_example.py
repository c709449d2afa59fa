#!/usr/bin/env python3
"""Reference evaluator for the `external` task kind.

Protocol:
  stdin   one JSON line: {"content": "<candidate solution text>"}
  stdout  one JSON line: {"reward": <float>, "valid": <bool>, "feedback": "<text>"}

The engine scans stdout bottom-up for the last line mentioning "reward", so
log lines printed above the verdict are harmless; a bare `reward: <number>`
line is also accepted. Diagnostics belong on stderr. A nonzero exit marks the
candidate invalid with stderr as the feedback; overrunning the task's
time_limit gets the process killed and the candidate scored invalid.

This example scores a JSON array of numbers by how close its sum lands to
100. It exists to exercise the plumbing, not to pose a hard problem.
"""

import json
import sys


def main() -> int:
    envelope = json.loads(sys.stdin.readline())
    content = envelope["content"]

    try:
        values = json.loads(content)
        if not isinstance(values, list) or not values or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in values
        ):
            raise ValueError("expected a non-empty JSON array of numbers")
    except ValueError as err:
        print(json.dumps({"reward": 0.0, "valid": False, "feedback": str(err)}))
        return 0

    total = sum(values)
    reward = 1.0 / (1.0 + abs(total - 100.0))
    feedback = f"sum={total:.6g}, target=100"
    print(json.dumps({"reward": reward, "valid": True, "feedback": feedback}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
