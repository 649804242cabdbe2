import json
import os
from contextlib import contextmanager
from pathlib import Path

from behave import *


@contextmanager
def cwd_from(context):
    try:
        cwd = context.config_directory.name
    except AttributeError:
        cwd = None
    origin = Path().absolute()
    try:
        if cwd is not None:
            os.chdir(cwd)
        yield
    finally:
        os.chdir(origin)


def load_report(file_path):
    with open(file_path) as f:
        return json.load(f)


@given("a file '{file_path}' containing")
def given_create_file_containing(context, file_path):
    with cwd_from(context):
        with open(file_path, mode="w+") as f:
            f.write(context.text)


@then("the file '{file_path}' will contain")
def then_file_contains(context, file_path):
    with cwd_from(context):
        pattern = str(context.text).strip()
        with open(file_path, mode="r") as f:
            contents = f.read()
            assert pattern in contents, f"{pattern}\nis not in:\n{contents}"


@then("the files '{first}' and '{second}' will be identical")
def then_files_are_identical(context, first, second):
    with cwd_from(context):
        a, b = Path(first).read_text(), Path(second).read_text()
        assert a == b, f"{first} and {second} differ"


@then("the report '{file_path}' will have verdict '{verdict}'")
def then_report_has_verdict(context, file_path, verdict):
    with cwd_from(context):
        actual = load_report(file_path)["verdict"]
        assert actual == verdict, f"Verdict is {actual}, expected {verdict}"


@then("the report '{file_path}' will not have '{key}'")
def then_report_lacks_key(context, file_path, key):
    with cwd_from(context):
        report = load_report(file_path)
        assert key not in report, f"{key} found in {file_path}"
