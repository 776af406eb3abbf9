#!/usr/bin/env python3
"""Drive the HTTP API end to end, including the disambiguation pick.

Starts the service in-process on a spare port, asks a clear question,
an ambiguous one, and a nonsense one, then resolves the ambiguity the
way the web console would: POST the chosen candidate to /v1/feedback
and watch the JSONL feedback log grow.
"""

import json
import tempfile
import threading
import time
from pathlib import Path

import httpx
import uvicorn

from ina import CorpusExample, ModelConfig, train
from ina.service import create_app

corpus = [
    CorpusExample("alpha beta gamma", "tie_a"),
    CorpusExample("alpha beta delta", "tie_b"),
    CorpusExample("omega psi", "other"),
]
model = train(corpus, ModelConfig(threshold=0.35))

log_path = Path(tempfile.mkdtemp()) / "feedback.jsonl"
app = create_app(model, feedback_log=log_path)

server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=8787, log_level="warning"))
thread = threading.Thread(target=server.run, daemon=True)
thread.start()
while not server.started:
    time.sleep(0.05)

base = "http://127.0.0.1:8787"
print("model info:", httpx.get(f"{base}/v1/model").json())

clear = httpx.post(f"{base}/v1/classify", json={"text": "omega psi"}).json()
print(f"\n'omega psi' -> {clear['status']} {clear['class']} (CL={clear['confidence']:.3f})")

junk = httpx.post(f"{base}/v1/classify", json={"text": "qwer zxcv uiop"}).json()
print(f"'qwer zxcv uiop' -> {junk['status']} (CL={junk['confidence']:.3f}, "
      f"{junk['unknown_count']} unknown words)")

ambiguous = httpx.post(f"{base}/v1/classify", json={"text": "alpha beta"}).json()
print(f"'alpha beta' -> {ambiguous['status']}:")
for i, cand in enumerate(ambiguous["candidates"], start=1):
    print(f"  {i}) {cand['class']}  e.g. {cand['example_query']!r}  CL={cand['confidence']:.3f}")

pick = ambiguous["candidates"][1]
response = httpx.post(
    f"{base}/v1/feedback",
    json={"query_id": ambiguous["query_id"], "chosen_class": pick["class"]},
)
print(f"\npicked {pick['class']} -> HTTP {response.status_code}")
record = json.loads(log_path.read_text().splitlines()[-1])
print("feedback log recorded:", {k: record[k] for k in ("query", "chosen_class")})

server.should_exit = True
thread.join(timeout=5)
