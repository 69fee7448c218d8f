# TODO: finish
import socket

def banner(host):
    s = socket.create_connection((host, 25))
    return s.recv(128)
