#!/usr/bin/env python3
"""ai: chat with OpenAI models from the terminal, with sessions kept on disk."""
import argparse
import configparser
import json
import os
import sys
import urllib.request

VERSION = "0.4.2"
CONFIG_PATH = os.path.expanduser("~/.config/ai/config.ini")
SESSION_DIR = os.path.expanduser("~/.local/share/ai/sessions")
API_URL = "https://api.openai.com/v1/chat/completions"


def parse_args():
    parser = argparse.ArgumentParser(prog="ai")
    parser.add_argument("prompt", nargs="*", help="prompt text; starts a shell when omitted")
    parser.add_argument("-s", "--session", default="default")
    parser.add_argument("-r", "--role", default="assistant")
    parser.add_argument("-m", "--model")
    parser.add_argument("--version", action="version", version=VERSION)
    return parser.parse_args()


def load_config(args):
    config = configparser.ConfigParser()
    config.read(CONFIG_PATH)
    section = config["ai"] if config.has_section("ai") else {}
    return {
        "api_key": os.environ.get("OPENAI_API_KEY", section.get("api_key", "")),
        "model": args.model or os.environ.get("AI_MODEL", section.get("model", "gpt-4o-mini")),
    }


def session_path(name):
    return os.path.join(SESSION_DIR, name + ".jsonl")


def load_history(name):
    history = []
    path = session_path(name)
    if os.path.exists(path):
        with open(path, encoding="utf-8") as f:
            lines = f.read().splitlines()
        for line in lines:
            message = json.loads(line)
            message = {"role": message["role"], "content": message["content"]}
            history.append(message)
    return history


def save_history(name, history):
    os.makedirs(SESSION_DIR, exist_ok=True)
    with open(session_path(name), "w", encoding="utf-8") as f:
        for message in history:
            if message["role"] != "system":
                f.write(json.dumps(message) + "\n")


def request(config, messages, stream):
    body = json.dumps({"model": config["model"], "messages": messages, "stream": stream}).encode()
    req = urllib.request.Request(API_URL, data=body, headers={
        "Content-Type": "application/json",
        "Authorization": "Bearer " + config["api_key"],
    })
    return urllib.request.urlopen(req)


def complete(config, messages):
    with request(config, messages, stream=False) as response:
        return json.load(response)["choices"][0]["message"]["content"]


def stream(config, messages):
    parts = []
    with request(config, messages, stream=True) as response:
        for raw in response:
            line = raw.decode("utf-8").strip()
            if not line.startswith("data: ") or line == "data: [DONE]":
                continue
            delta = json.loads(line[6:])["choices"][0]["delta"].get("content", "")
            print(delta, end="", flush=True)
            parts.append(delta)
    print()
    return "".join(parts)


def main():
    args = parse_args()
    config = load_config(args)
    if not config["api_key"]:
        print("ai: no API key; set OPENAI_API_KEY or api_key in " + CONFIG_PATH, file=sys.stderr)
        sys.exit(1)
    history = load_history(args.session)
    system = {"role": "system", "content": f"You are a helpful {args.role}."}
    if args.prompt:
        prompt = " ".join(args.prompt)
        reply = complete(config, [system] + history + [{"role": "user", "content": prompt}])
        print(reply)
        history += [{"role": "user", "content": prompt}, {"role": "assistant", "content": reply}]
    else:
        while True:
            try:
                prompt = input("ai> ")
            except EOFError:
                break
            if prompt.strip() in ("exit", "quit"):
                break
            reply = stream(config, [system] + history + [{"role": "user", "content": prompt}])
            history += [{"role": "user", "content": prompt}, {"role": "assistant", "content": reply}]
    save_history(args.session, history)


if __name__ == "__main__":
    main()
