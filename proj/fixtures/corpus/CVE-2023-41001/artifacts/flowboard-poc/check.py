# CVE-2023-41001 detection only.
import requests

TARGET_URL = "http://flowboard.example.invalid"

r = requests.post(TARGET_URL + "/api/widgets/preview", json={"template": "{{ 7*7 }}"})
print("vulnerable" if "49" in r.text else "not vulnerable")
