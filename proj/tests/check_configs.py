"""Validate every configs/*.json against docs/config.schema.json; files named bad*.json must fail."""
import json
import pathlib
import sys

import jsonschema

root = pathlib.Path(sys.argv[1])
schema = json.loads((root / "docs" / "config.schema.json").read_text())
jsonschema.Draft202012Validator.check_schema(schema)
validator = jsonschema.Draft202012Validator(schema)
status = 0
for path in sorted((root / "configs").glob("*.json")):
    errors = list(validator.iter_errors(json.loads(path.read_text())))
    expect_bad = path.name.startswith("bad")
    if bool(errors) != expect_bad:
        status = 1
        print(f"FAIL {path.name}: {'accepted' if expect_bad else errors[0].message}")
    else:
        print(f"ok   {path.name}")
sys.exit(status)
