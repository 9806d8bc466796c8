"""Line-oriented circuit description parser."""

import logging
from pathlib import Path
from typing import List, Optional, Union

from config.settings import MAX_QUBITS
from gates import DIAG, ONE_QUBIT_ARITY, Circuit, GateOp

logger = logging.getLogger(__name__)


class CircuitParseError(ValueError):
    """Malformed circuit text; `line` is the 1-based source line (None if unknown)."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"{message} at line {line}" if line is not None else message)


class CircuitParser:
    """
    Parser for circuit files.

    Format:
        qubits <n>
        gate <name> <target> [params...]
        diag <q1> <q2> <phi00> <phi01> <phi10> <phi11>

    `#` starts a comment; blank lines are ignored. Angles are radians.
    """

    def __init__(self):
        """Initialize the circuit parser."""
        self.circuit: Optional[Circuit] = None

    def parse_file(self, filepath: Union[str, Path]) -> Circuit:
        """
        Parse a circuit file.

        Raises:
            OSError: If the file cannot be read
            CircuitParseError: If the contents are malformed
        """
        with open(filepath, 'r', encoding='utf-8') as f:
            return self.parse_text(f.read())

    def parse_text(self, text: str) -> Circuit:
        n: Optional[int] = None
        gates: List[GateOp] = []

        for line_number, raw in enumerate(text.splitlines(), start=1):
            tokens = raw.split('#', 1)[0].split()
            if not tokens:
                continue

            keyword = tokens[0]
            if n is None:
                if keyword != 'qubits':
                    raise CircuitParseError("expected 'qubits <n>' header", line_number)
                n = self._parse_header(tokens, line_number)
                continue

            if keyword == 'qubits':
                raise CircuitParseError("duplicate 'qubits' header", line_number)
            if keyword == 'gate':
                gates.append(self._parse_gate(tokens[1:], n, line_number))
            elif keyword == DIAG:
                gates.append(self._parse_diag(tokens[1:], n, line_number))
            else:
                raise CircuitParseError(f"unknown statement '{keyword}'", line_number)

        if n is None:
            raise CircuitParseError("missing 'qubits <n>' header")
        self.circuit = Circuit(n=n, gates=tuple(gates))
        logger.debug("Parsed %d gates on %d qubits", len(gates), n)
        return self.circuit

    def _parse_header(self, tokens: List[str], line: int) -> int:
        if len(tokens) != 2:
            raise CircuitParseError("'qubits' takes exactly one argument", line)
        n = self._integer(tokens[1], 'qubit count', line)
        if not 1 <= n <= MAX_QUBITS:
            raise CircuitParseError(f"qubit count {n} outside [1, {MAX_QUBITS}]", line)
        return n

    def _parse_gate(self, tokens: List[str], n: int, line: int) -> GateOp:
        if not tokens:
            raise CircuitParseError("missing gate name", line)
        name = tokens[0].lower()
        if name not in ONE_QUBIT_ARITY:
            raise CircuitParseError(f"unknown gate '{tokens[0]}'", line)
        if len(tokens) < 2:
            raise CircuitParseError(f"gate {name} needs a target", line)
        arity = ONE_QUBIT_ARITY[name]
        params = tokens[2:]
        if len(params) != arity:
            raise CircuitParseError(f"gate {name} takes {arity} parameters, got {len(params)}", line)
        target = self._target(tokens[1], n, line)
        return GateOp(name, (target,), tuple(self._number(p, line) for p in params))

    def _parse_diag(self, tokens: List[str], n: int, line: int) -> GateOp:
        if len(tokens) != 6:
            raise CircuitParseError(f"diag takes two targets and four phases, got {len(tokens)} values", line)
        a, b = (self._target(t, n, line) for t in tokens[:2])
        if a == b:
            raise CircuitParseError("diag targets must differ", line)
        return GateOp(DIAG, (a, b), tuple(self._number(p, line) for p in tokens[2:]))

    def _target(self, token: str, n: int, line: int) -> int:
        q = self._integer(token, 'target', line)
        if not 0 <= q < n:
            raise CircuitParseError(f"target {q} out of range for {n} qubits", line)
        return q

    @staticmethod
    def _integer(token: str, what: str, line: int) -> int:
        try:
            return int(token)
        except ValueError:
            raise CircuitParseError(f"invalid {what} '{token}'", line) from None

    @staticmethod
    def _number(token: str, line: int) -> float:
        try:
            value = float(token)
        except ValueError:
            raise CircuitParseError(f"invalid number '{token}'", line) from None
        if value != value or value in (float('inf'), float('-inf')):
            raise CircuitParseError(f"non-finite number '{token}'", line)
        return value

    @staticmethod
    def serialize(circuit: Circuit) -> str:
        """Text form that parses back to an identical circuit."""
        lines = [f"qubits {circuit.n}"]
        for gate in circuit.gates:
            params = ' '.join(repr(p) for p in gate.params)
            targets = ' '.join(str(q) for q in gate.targets)
            prefix = DIAG if gate.is_diagonal else f"gate {gate.name}"
            lines.append(f"{prefix} {targets} {params}".rstrip())
        return '\n'.join(lines) + '\n'


def parse_circuit(text: str) -> Circuit:
    return CircuitParser().parse_text(text)


def serialize_circuit(circuit: Circuit) -> str:
    return CircuitParser.serialize(circuit)
