"""Type-specific validation of candidate matches.

Each pattern type maps to one pure check that confirms or rejects a
candidate the regex already shaped: checksums (Luhn, IBAN mod-97),
reserved-range rules (SSN areas, NANP area codes), structural rules
(email), calendar arithmetic (date of birth against an injected clock).
No validator performs network I/O; everything is deterministic given
(candidate, clock, region hint).
"""

from __future__ import annotations

import datetime as dt
import re
from dataclasses import dataclass

from .glossary import PatternType

FORMAT_OK = "format_ok"
FORMAT_ONLY = "format_only"  # weak pass: shape checked, no stronger rule available


@dataclass(frozen=True)
class ValidationVerdict:
    passed: bool
    reason: str

    @staticmethod
    def ok(reason: str = FORMAT_OK) -> "ValidationVerdict":
        return ValidationVerdict(True, reason)

    @staticmethod
    def fail(reason: str) -> "ValidationVerdict":
        return ValidationVerdict(False, reason)


def luhn_check(digits: str) -> ValidationVerdict:
    """Mod-10 checksum: double every second digit from the right, subtract
    9 above 9, sum; valid iff the sum is divisible by 10."""
    cleaned = digits.replace(" ", "").replace("-", "")
    if not cleaned.isdigit():
        return ValidationVerdict.fail("luhn_non_digit")
    if not 1 <= len(cleaned) <= 19:
        return ValidationVerdict.fail("luhn_length")
    total = 0
    for i, ch in enumerate(reversed(cleaned)):
        d = ord(ch) - 48
        if i % 2 == 1:
            d *= 2
            if d > 9:
                d -= 9
        total += d
    if total % 10 != 0:
        return ValidationVerdict.fail("luhn_checksum_fail")
    return ValidationVerdict.ok("luhn_ok")


_SSN_MASKED = re.compile(r"^[Xx]{3}-?[Xx]{2}-?(\d{4})$")


def ssn_check(candidate: str) -> ValidationVerdict:
    """Reserved-range rules: area not 000/666/900-999, group not 00,
    serial not 0000. Masked forms validate only the visible serial."""
    masked = _SSN_MASKED.match(candidate)
    if masked:
        if masked.group(1) == "0000":
            return ValidationVerdict.fail("ssn_serial_zero")
        return ValidationVerdict.ok("ssn_masked_ok")
    digits = candidate.replace("-", "").replace(" ", "")
    if not digits.isdigit() or len(digits) != 9:
        return ValidationVerdict.fail("ssn_format")
    area, group, serial = digits[:3], digits[3:5], digits[5:]
    if area == "000" or area == "666" or "900" <= area <= "999":
        return ValidationVerdict.fail("ssn_area_reserved")
    if group == "00":
        return ValidationVerdict.fail("ssn_group_zero")
    if serial == "0000":
        return ValidationVerdict.fail("ssn_serial_zero")
    return ValidationVerdict.ok("ssn_ok")


def iban_check(candidate: str) -> ValidationVerdict:
    """ISO 13616 mod-97: move the first four characters to the end, map
    letters to 10..35, and the resulting integer must be ≡ 1 (mod 97)."""
    cleaned = candidate.replace(" ", "").upper()
    if not cleaned.isalnum():
        return ValidationVerdict.fail("iban_charset")
    if not 15 <= len(cleaned) <= 34:
        return ValidationVerdict.fail("iban_length")
    if not (cleaned[:2].isalpha() and cleaned[2:4].isdigit()):
        return ValidationVerdict.fail("iban_format")
    rearranged = cleaned[4:] + cleaned[:4]
    digits = "".join(str(int(ch, 36)) for ch in rearranged)
    if int(digits) % 97 != 1:
        return ValidationVerdict.fail("iban_mod97_fail")
    return ValidationVerdict.ok("iban_ok")


def email_check(candidate: str) -> ValidationVerdict:
    """Structural checks only; no DNS."""
    if candidate.count("@") != 1:
        return ValidationVerdict.fail("email_at_count")
    local, domain = candidate.split("@")
    if not 1 <= len(local) <= 64:
        return ValidationVerdict.fail("email_local_length")
    labels = domain.lower().split(".")
    if len(labels) < 2:
        return ValidationVerdict.fail("domain_label_count")
    for label in labels:
        if not 1 <= len(label) <= 63:
            return ValidationVerdict.fail("domain_label_length")
        if not all(c.isascii() and (c.isalnum() or c == "-") for c in label):
            return ValidationVerdict.fail("domain_label_charset")
        if label[0] == "-" or label[-1] == "-":
            return ValidationVerdict.fail("domain_label_hyphen")
    top = labels[-1]
    if len(top) < 2 or not top.isalpha():
        return ValidationVerdict.fail("domain_top_label")
    return ValidationVerdict.ok("email_ok")


_PUNCT = re.compile(r"[\s().\-]")


def phone_check(candidate: str, region_hint: str | None = None) -> ValidationVerdict:
    """Country-format table: +1 NANP and +44 are checked strictly; numbers
    without a country prefix (and no region hint) pass weakly as
    ``format_only``. No carrier lookups."""
    stripped = _PUNCT.sub("", candidate)
    if stripped.startswith("+"):
        number = stripped[1:]
        if not number.isdigit():
            return ValidationVerdict.fail("phone_charset")
        if number.startswith("1"):
            return _nanp_check(number[1:])
        if number.startswith("44"):
            rest = number[2:]
            if rest.startswith("0"):
                rest = rest[1:]
            if len(rest) != 10:
                return ValidationVerdict.fail("uk_length")
            return ValidationVerdict.ok("uk_ok")
        if not 7 <= len(number) <= 15:
            return ValidationVerdict.fail("phone_length")
        return ValidationVerdict.ok(FORMAT_ONLY)
    if not stripped.isdigit():
        return ValidationVerdict.fail("phone_charset")
    if region_hint == "US":
        digits = stripped[1:] if len(stripped) == 11 and stripped[0] == "1" else stripped
        return _nanp_check(digits)
    if region_hint == "GB":
        rest = stripped[1:] if stripped.startswith("0") else stripped
        if len(rest) != 10:
            return ValidationVerdict.fail("uk_length")
        return ValidationVerdict.ok("uk_ok")
    if not 7 <= len(stripped) <= 15:
        return ValidationVerdict.fail("phone_length")
    return ValidationVerdict.ok(FORMAT_ONLY)


def _nanp_check(digits: str) -> ValidationVerdict:
    if len(digits) != 10:
        return ValidationVerdict.fail("nanp_length")
    if digits[0] in "01":
        return ValidationVerdict.fail("nanp_area_invalid")
    if digits[3] in "01":
        return ValidationVerdict.fail("nanp_exchange_invalid")
    return ValidationVerdict.ok("nanp_ok")


_DATE_FORMATS = (
    ("%Y-%m-%d", re.compile(r"^\d{4}-\d{2}-\d{2}$")),
    ("%Y/%m/%d", re.compile(r"^\d{4}/\d{2}/\d{2}$")),
    ("%m/%d/%Y", re.compile(r"^\d{2}/\d{2}/\d{4}$")),
    ("%m-%d-%Y", re.compile(r"^\d{2}-\d{2}-\d{4}$")),
)

MAX_AGE_YEARS = 130


def date_of_birth_check(candidate: str, clock: dt.date | None = None) -> ValidationVerdict:
    """Calendar validity plus a plausible age range [0, 130] years relative
    to ``clock`` (the pipeline injects it; tests pass fixed dates)."""
    if clock is None:
        clock = dt.date.today()
    parsed: dt.date | None = None
    recognized = False
    for fmt, shape in _DATE_FORMATS:
        if not shape.match(candidate):
            continue
        recognized = True
        try:
            parsed = dt.datetime.strptime(candidate, fmt).date()
            break
        except ValueError:
            continue
    if parsed is None:
        return ValidationVerdict.fail("calendar_invalid" if recognized else "date_format")
    if parsed > clock:
        return ValidationVerdict.fail("age_range")
    age = clock.year - parsed.year - ((clock.month, clock.day) < (parsed.month, parsed.day))
    if age > MAX_AGE_YEARS:
        return ValidationVerdict.fail("age_range")
    return ValidationVerdict.ok("dob_ok")


_US_ZIP = re.compile(r"^\d{5}(-\d{4})?$")
_UK_POSTCODE = re.compile(r"^[A-Z]{1,2}\d[A-Z\d]? ?\d[A-Z]{2}$", re.IGNORECASE)


def postal_code_check(candidate: str) -> ValidationVerdict:
    """Shape table: US ZIP / ZIP+4 and UK postcodes."""
    if _US_ZIP.match(candidate):
        return ValidationVerdict.ok("zip_ok")
    if _UK_POSTCODE.match(candidate):
        return ValidationVerdict.ok("uk_postcode_ok")
    return ValidationVerdict.fail("postal_format")


# EIN prefixes currently assigned by the IRS (campus/online ranges).
_EIN_PREFIXES = {
    "01", "02", "03", "04", "05", "06", "10", "11", "12", "13", "14", "15", "16",
    "20", "21", "22", "23", "24", "25", "26", "27", "30", "31", "32", "33", "34",
    "35", "36", "37", "38", "39", "40", "41", "42", "43", "44", "45", "46", "47",
    "48", "50", "51", "52", "53", "54", "55", "56", "57", "58", "59", "60", "61",
    "62", "63", "64", "65", "66", "67", "68", "71", "72", "73", "74", "75", "76",
    "77", "80", "81", "82", "83", "84", "85", "86", "87", "88", "90", "91", "92",
    "93", "94", "95", "98", "99",
}


def tin_check(candidate: str) -> ValidationVerdict:
    """US TIN table: EIN (valid campus prefix) or ITIN (9xx with the
    assigned group ranges); a plain 9-digit TIN falls back to SSN rules."""
    digits = candidate.replace("-", "").replace(" ", "")
    if not digits.isdigit() or len(digits) != 9:
        return ValidationVerdict.fail("tin_format")
    if "-" in candidate and candidate.index("-") == 2:  # NN-NNNNNNN: EIN layout
        if digits[:2] in _EIN_PREFIXES:
            return ValidationVerdict.ok("ein_ok")
        return ValidationVerdict.fail("ein_prefix_invalid")
    if digits[0] == "9":
        group = int(digits[3:5])
        if 70 <= group <= 88 or 90 <= group <= 92 or 94 <= group <= 99:
            return ValidationVerdict.ok("itin_ok")
        return ValidationVerdict.fail("itin_group_invalid")
    return ssn_check(candidate)


def validate(
    pattern_type: PatternType,
    candidate: str,
    clock: dt.date | None = None,
    region_hint: str | None = None,
) -> ValidationVerdict:
    """Dispatch to the validator bound to ``pattern_type``.

    ``GENERIC`` always passes: the regex already enforced the only shape
    the glossary author asked for.
    """
    if not candidate:
        raise ValueError("candidate must be non-empty")
    if pattern_type is PatternType.GENERIC:
        return ValidationVerdict.ok("generic_ok")
    if pattern_type is PatternType.CREDIT_CARD:
        return luhn_check(candidate)
    if pattern_type is PatternType.SSN:
        return ssn_check(candidate)
    if pattern_type is PatternType.IBAN:
        return iban_check(candidate)
    if pattern_type is PatternType.EMAIL:
        return email_check(candidate)
    if pattern_type is PatternType.PHONE:
        return phone_check(candidate, region_hint)
    if pattern_type is PatternType.DATE_OF_BIRTH:
        return date_of_birth_check(candidate, clock)
    if pattern_type is PatternType.POSTAL_CODE:
        return postal_code_check(candidate)
    if pattern_type is PatternType.TIN:
        return tin_check(candidate)
    raise ValueError(f"no validator bound for pattern type {pattern_type!r}")
