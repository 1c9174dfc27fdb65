from __future__ import annotations

import ast
import math
import operator as op
from typing import Union

from sensorimap.core.exceptions import ConfigurationError


# Supported operators
_OPS = {
    ast.Add: op.add,
    ast.Sub: op.sub,
    ast.Mult: op.mul,
    ast.Div: op.truediv,
    ast.Pow: op.pow,
    ast.USub: op.neg,
    ast.UAdd: op.pos,
}

_NAMES = {"pi": math.pi, "e": math.e}


def _eval(node: ast.AST) -> float:
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
        return _OPS[type(node.op)](_eval(node.operand))
    if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
        return _OPS[type(node.op)](_eval(node.left), _eval(node.right))
    raise ConfigurationError(f"unsupported expression element: {ast.dump(node)}")


def parse_number(text: Union[str, float, int]) -> float:
    """Evaluate a numeric config value such as ``150``, ``1e-8`` or ``5*pi/6``."""

    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return float(text)
    try:
        tree = ast.parse(str(text).strip(), mode="eval")
        value = _eval(tree.body)
    except ConfigurationError:
        raise
    except Exception as e:  # noqa: BLE001
        raise ConfigurationError(f"not a number: {text!r} ({e})") from e
    if not math.isfinite(value):
        raise ConfigurationError(f"not a finite number: {text!r}")
    return value
