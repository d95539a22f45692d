"""Skillset compiler and explicit-state LTL model checker.

The heavy lifting lives in the compiled extension ``skillmc._core``; this
package re-exports its public surface:

- :func:`compile` — parse + compile skillset source text into a
  :class:`CompiledSkillset` handle with ``verify``/``explore``/``components``
  methods.
- :func:`parse_check` / :func:`format_source` — parse-only validation and
  canonical reformatting of skillset source.
- :func:`parse_property` — LTL property syntax checking.
"""

from skillmc._core import (
    CompiledSkillset,
    compile,
    format_source,
    parse_check,
    parse_property,
)

__all__ = [
    "CompiledSkillset",
    "compile",
    "format_source",
    "parse_check",
    "parse_property",
]
