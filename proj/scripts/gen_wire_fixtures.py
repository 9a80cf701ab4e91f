#!/usr/bin/env python3
"""Generate golden DNS wire fixtures (query/response .bin pairs).

Packets are assembled field-by-field from the RFC 1035 layout and then
re-parsed by the independent decoder below before anything is written,
so the fixtures are self-checked rather than derived from the server
implementation.

Usage: gen_wire_fixtures.py [outdir]   (default: fixtures/wire)
"""

import struct
import sys
from pathlib import Path

QTYPE = {"A": 1, "NS": 2, "CNAME": 5, "MX": 15, "TXT": 16, "AAAA": 28, "ANY": 255}
CLASS_IN = 1
TTL = 300

FLAG_QR = 0x8000
FLAG_AA = 0x0400
FLAG_RD = 0x0100

RCODE_NOERROR = 0
RCODE_FORMERR = 1
RCODE_SERVFAIL = 2
RCODE_NXDOMAIN = 3
RCODE_NOTIMP = 4


def header(ident, flags, qd, an, ns=0, ar=0):
    return struct.pack(">HHHHHH", ident, flags, qd, an, ns, ar)


def qname(name):
    out = b""
    for label in name.split("."):
        raw = label.encode()
        assert 0 < len(raw) < 64
        out += bytes([len(raw)]) + raw
    return out + b"\x00"


def question(name, qtype):
    return qname(name) + struct.pack(">HH", QTYPE[qtype], CLASS_IN)


def rr_ptr(qtype, rdata):
    # Answer name is a compression pointer to the question name at offset 12.
    return b"\xc0\x0c" + struct.pack(">HHIH", QTYPE[qtype], CLASS_IN, TTL, len(rdata)) + rdata


def a_rdata(ip):
    return bytes(int(x) for x in ip.split("."))


def txt_rdata(text):
    raw = text.encode()
    assert len(raw) <= 255
    return bytes([len(raw)]) + raw


def query(ident, name, qtype, rd=False):
    flags = FLAG_RD if rd else 0
    return header(ident, flags, 1, 0) + question(name, qtype)


# ---------------------------------------------------------------------------
# Independent decoder used to sanity-check every generated packet.


def decode(pkt):
    if len(pkt) < 12:
        raise ValueError("short header")
    ident, flags, qd, an, ns, ar = struct.unpack(">HHHHHH", pkt[:12])
    off = 12
    questions = []
    for _ in range(qd):
        labels = []
        while True:
            if off >= len(pkt):
                raise ValueError("name overruns packet")
            ln = pkt[off]
            off += 1
            if ln == 0:
                break
            if ln >= 0xC0:
                raise ValueError("compression in question")
            if off + ln > len(pkt):
                raise ValueError("label overruns packet")
            labels.append(pkt[off : off + ln].decode())
            off += ln
        qt, qc = struct.unpack(">HH", pkt[off : off + 4])
        off += 4
        questions.append((".".join(labels), qt, qc))
    answers = []
    for _ in range(an):
        if pkt[off] != 0xC0 or pkt[off + 1] != 0x0C:
            raise ValueError("expected pointer to question name")
        off += 2
        rtype, rclass, ttl, rdlen = struct.unpack(">HHIH", pkt[off : off + 10])
        off += 10
        answers.append((rtype, rclass, ttl, pkt[off : off + rdlen]))
        off += rdlen
    if off != len(pkt):
        raise ValueError("trailing bytes")
    return ident, flags, questions, answers


def check(name, pkt, ident, flags, nq, na):
    got_id, got_flags, qs, ans = decode(pkt)
    assert got_id == ident, name
    assert got_flags == flags, f"{name}: flags {got_flags:#06x} != {flags:#06x}"
    assert len(qs) == nq and len(ans) == na, name


def main():
    outdir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("fixtures/wire")
    outdir.mkdir(parents=True, exist_ok=True)

    fixtures = {}

    # ok: A query for foo.bit (record holds ip 1.2.3.4), RD set and echoed
    fixtures["q_ok"] = query(0x1234, "foo.bit", "A", rd=True)
    fixtures["r_ok"] = (
        header(0x1234, FLAG_QR | FLAG_AA | FLAG_RD, 1, 1)
        + question("foo.bit", "A")
        + rr_ptr("A", a_rdata("1.2.3.4"))
    )
    check("r_ok", fixtures["r_ok"], 0x1234, 0x8500, 1, 1)

    # any: ANY query for shop.bazar (A 5.6.7.8 plus TXT "hello")
    fixtures["q_any"] = query(0x2345, "shop.bazar", "ANY")
    fixtures["r_any"] = (
        header(0x2345, FLAG_QR | FLAG_AA, 1, 2)
        + question("shop.bazar", "ANY")
        + rr_ptr("A", a_rdata("5.6.7.8"))
        + rr_ptr("TXT", txt_rdata("hello"))
    )
    check("r_any", fixtures["r_any"], 0x2345, 0x8400, 1, 2)

    # nxdomain: absent name under a supported TLD
    fixtures["q_nx"] = query(0x2222, "absent.bit", "A")
    fixtures["r_nx"] = header(0x2222, FLAG_QR | FLAG_AA | RCODE_NXDOMAIN, 1, 0) + question(
        "absent.bit", "A"
    )
    check("r_nx", fixtures["r_nx"], 0x2222, 0x8403, 1, 0)

    # no data: foo.bit exists but has no AAAA record
    fixtures["q_nodata"] = query(0x3333, "foo.bit", "AAAA")
    fixtures["r_nodata"] = header(0x3333, FLAG_QR | FLAG_AA, 1, 0) + question("foo.bit", "AAAA")
    check("r_nodata", fixtures["r_nodata"], 0x3333, 0x8400, 1, 0)

    # servfail: same query answered while the backing store is unavailable
    fixtures["q_servfail"] = query(0x4444, "foo.bit", "A")
    fixtures["r_servfail"] = header(0x4444, FLAG_QR | RCODE_SERVFAIL, 1, 0) + question(
        "foo.bit", "A"
    )
    check("r_servfail", fixtures["r_servfail"], 0x4444, 0x8002, 1, 0)

    # notimp, unparseable form: two questions; header echoed, no sections
    fixtures["q_notimp_qd2"] = (
        header(0x5555, 0, 2, 0) + question("foo.bit", "A") + question("bar.bit", "A")
    )
    fixtures["r_notimp_qd2"] = header(0x5555, FLAG_QR | RCODE_NOTIMP, 0, 0)
    check("r_notimp_qd2", fixtures["r_notimp_qd2"], 0x5555, 0x8004, 0, 0)

    # notimp, parseable form: MX is outside the served qtype subset
    fixtures["q_notimp_mx"] = query(0x6666, "foo.bit", "MX")
    fixtures["r_notimp_mx"] = header(0x6666, FLAG_QR | RCODE_NOTIMP, 1, 0) + question(
        "foo.bit", "MX"
    )
    check("r_notimp_mx", fixtures["r_notimp_mx"], 0x6666, 0x8004, 1, 0)

    # formerr: label length runs past the end of the packet
    fixtures["q_formerr"] = header(0x7777, 0, 1, 0) + b"\x45abc"
    fixtures["r_formerr"] = header(0x7777, FLAG_QR | RCODE_FORMERR, 0, 0)
    check("r_formerr", fixtures["r_formerr"], 0x7777, 0x8001, 0, 0)

    for name, pkt in sorted(fixtures.items()):
        assert len(pkt) <= 512, name
        (outdir / f"{name}.bin").write_bytes(pkt)
        print(f"{name}.bin  {len(pkt)} bytes")


if __name__ == "__main__":
    main()
