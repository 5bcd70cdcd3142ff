"""
Trial lists in the ASVspoof countermeasure layout.

  SPK UTT - ATTACK KEY

The second field is the utterance id, the second-to-last an attack tag
(ignored for scoring), the last the key.
"""

from dataclasses import dataclass

from ..errors import FormatError


class Key:
    """Trial keys and their label indices"""
    BONAFIDE = 'bonafide'
    SPOOF = 'spoof'

    ALL = (BONAFIDE, SPOOF)
    LABEL = {BONAFIDE: 0, SPOOF: 1}


@dataclass
class ProtocolEntry:
    """One trial"""
    utt_id: str
    key: str
    speaker: str = '-'
    attack: str = '-'

    @property
    def label(self):
        return Key.LABEL[self.key]

    def line(self):
        return f"{self.speaker} {self.utt_id} - {self.attack} {self.key}"


def parse_protocol(text, source="protocol"):
    """
    Parse protocol text.

    Args:
        text: file contents
        source: name used in diagnostics

    Returns:
        list: ProtocolEntry in file order

    Raises:
        FormatError: short line, unknown key token or duplicate id
    """
    entries = []
    seen = set()
    for lineno, line in enumerate(text.splitlines(), 1):
        fields = line.split()
        if not fields:
            continue
        if len(fields) < 3:
            raise FormatError(f"{source} line {lineno}: expected 'SPK UTT - ATTACK KEY', got {line.strip()!r}")
        key = fields[-1]
        if key not in Key.ALL:
            raise FormatError(f"{source} line {lineno}: unknown key {key!r} "
                              f"(expected {Key.BONAFIDE} or {Key.SPOOF})")
        utt_id = fields[1]
        if utt_id in seen:
            raise FormatError(f"{source} line {lineno}: duplicate utterance id {utt_id!r}")
        seen.add(utt_id)
        entries.append(ProtocolEntry(utt_id=utt_id, key=key, speaker=fields[0], attack=fields[-2]))
    return entries


def read_protocol(path):
    with open(path, 'r', encoding='utf-8') as f:
        return parse_protocol(f.read(), source=str(path))


def write_protocol(path, entries):
    with open(path, 'w', encoding='utf-8') as f:
        for entry in entries:
            f.write(entry.line() + '\n')


def protocol_keys(entries):
    """Mapping utt_id -> key"""
    return {e.utt_id: e.key for e in entries}
