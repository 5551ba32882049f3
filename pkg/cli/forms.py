import hashlib
import json
import re

import numpy as np
from django import forms
from django.conf import settings
from django.core.exceptions import ValidationError

from diagnostics.enums import DiagnosticCheck
from diagnostics.records import MAX_ORACLE_STATES
from samplers.records import LadderConfig
from samplers.rng import MAX_SEED
from samplers.services import ladder_temperatures
from samplers.validators import (
    validate_open_unit_interval,
    validate_positive,
    validate_steps,
    validate_temperatures,
)
from target.catalog import build_target
from target.validators import (
    validate_drift_exponent,
    validate_spd,
    validate_temperature,
)
from toy.enums import ToyState
from toy.records import ToyKernel

from .enums import Command
from .records import RunConfig

MIN_MC_REPS = 1000


class RunConfigForm(forms.Form):
    command = forms.ChoiceField(choices=Command.choices)
    target = forms.JSONField(required=False)
    seed = forms.IntegerField(required=False, min_value=0, max_value=MAX_SEED)
    output_path = forms.CharField(required=False, max_length=255)
    replicates = forms.IntegerField(required=False, min_value=1)
    steps = forms.IntegerField(required=False, min_value=1)
    burn_in = forms.IntegerField(required=False, min_value=0)
    thinning = forms.IntegerField(required=False, min_value=1)
    kappa = forms.FloatField(required=False)
    x0 = forms.JSONField(required=False)
    initial_cov = forms.JSONField(required=False)
    upsilon = forms.FloatField(required=False)
    temperatures = forms.JSONField(required=False)
    t_max = forms.FloatField(required=False)
    levels = forms.IntegerField(required=False, min_value=1)
    proposal_covs = forms.JSONField(required=False)
    toy_theta = forms.FloatField(required=False)
    toy_x0 = forms.IntegerField(required=False)
    epsilon = forms.FloatField(required=False)
    checks = forms.JSONField(required=False)
    instances = forms.IntegerField(required=False, min_value=1)
    n_states = forms.IntegerField(
        required=False, min_value=2, max_value=MAX_ORACLE_STATES
    )
    oracle_temperature = forms.FloatField(required=False)
    mc_reps = forms.IntegerField(required=False, min_value=MIN_MC_REPS)
    drift_exponent = forms.FloatField(required=False)
    test_points = forms.JSONField(required=False)
    pool_size = forms.IntegerField(required=False, min_value=2)

    def clean_output_path(self):
        path = (self.cleaned_data.get("output_path") or "").strip()
        if "/" in path or "\\" in path:
            raise forms.ValidationError(
                "output_path is a file stem inside --out, not a path."
            )
        return path or None

    def clean_target(self):
        target = self.cleaned_data.get("target")
        if target is not None:
            build_target(target)
        return target

    def clean_kappa(self):
        kappa = self.cleaned_data.get("kappa")
        if kappa is not None:
            validate_positive(kappa, "kappa")
        return kappa

    def clean_upsilon(self):
        upsilon = self.cleaned_data.get("upsilon")
        if upsilon is not None:
            validate_open_unit_interval(upsilon, "upsilon")
        return upsilon

    def clean_temperatures(self):
        temperatures = self.cleaned_data.get("temperatures")
        if temperatures is None:
            return None
        if not isinstance(temperatures, list) or not all(
            _is_number(t) for t in temperatures
        ):
            raise forms.ValidationError("temperatures must be a list of numbers.")
        validate_temperatures(temperatures)
        return temperatures

    def clean_toy_theta(self):
        theta = self.cleaned_data.get("toy_theta")
        if theta is not None:
            ToyKernel(theta)
        return theta

    def clean_toy_x0(self):
        state = self.cleaned_data.get("toy_x0")
        if state is not None and state not in ToyState.values:
            raise forms.ValidationError(f"toy_x0 must be 0 or 1, got {state}.")
        return state

    def clean_epsilon(self):
        epsilon = self.cleaned_data.get("epsilon")
        if epsilon is not None:
            validate_open_unit_interval(epsilon, "epsilon")
        return epsilon

    def clean_checks(self):
        checks = self.cleaned_data.get("checks")
        if self.data.get("checks") == []:
            raise forms.ValidationError("checks must name at least one check.")
        if checks is None:
            return None
        if not isinstance(checks, list):
            raise forms.ValidationError("checks must be a list of check names.")
        unknown = [c for c in checks if c not in DiagnosticCheck.values]
        if unknown:
            raise forms.ValidationError(
                f"Unknown check(s) {', '.join(map(str, unknown))}; choose from "
                f"{', '.join(DiagnosticCheck.values)}."
            )
        return checks

    def clean_oracle_temperature(self):
        temperature = self.cleaned_data.get("oracle_temperature")
        if temperature is not None:
            validate_temperature(temperature)
        return temperature

    def clean_drift_exponent(self):
        exponent = self.cleaned_data.get("drift_exponent")
        if exponent is not None:
            validate_drift_exponent(exponent)
        return exponent

    def clean(self):
        cleaned_data = super().clean()
        if self.errors:
            return cleaned_data
        command = cleaned_data.get("command")
        steps = cleaned_data.get("steps") or RunConfig.steps
        burn_in = cleaned_data.get("burn_in") or 0
        try:
            validate_steps(steps, burn_in)
        except ValidationError as error:
            self.add_error("burn_in", error)

        target = None
        if cleaned_data.get("target") is not None:
            target = build_target(cleaned_data["target"])
        elif command in (Command.RUN_AM, Command.RUN_IT):
            self.add_error("target", f"target is required for {command}.")
            return cleaned_data

        if command == Command.RUN_AM:
            self._check_am(cleaned_data, target.dim)
        elif command == Command.RUN_IT:
            self._check_it(cleaned_data, target.dim, steps, burn_in)
        elif command == Command.DIAGNOSE:
            dim = 1 if target is None else target.dim
            self._check_test_points(cleaned_data, dim)
            self._check_diagnose_proposal(cleaned_data, dim)
        return cleaned_data

    def _check_am(self, cleaned_data, dim):
        x0 = cleaned_data.get("x0")
        if x0 is not None and _shape(x0) != (dim,):
            self.add_error("x0", f"x0 must be a list of {dim} numbers.")
        initial_cov = cleaned_data.get("initial_cov")
        if initial_cov is not None:
            matrix = _as_matrix(initial_cov)
            if matrix is None or matrix.shape != (dim, dim):
                self.add_error(
                    "initial_cov", f"initial_cov must be a {dim}x{dim} matrix."
                )
            elif not np.allclose(matrix, matrix.T, rtol=0, atol=1e-12):
                self.add_error("initial_cov", "initial_cov must be symmetric.")

    def _check_it(self, cleaned_data, dim, steps, burn_in):
        if steps > settings.MCMC_HISTORY_LIMIT:
            self.add_error(
                "steps",
                "steps must not exceed MCMC_HISTORY_LIMIT "
                f"({settings.MCMC_HISTORY_LIMIT}) for run-it.",
            )
            return
        if not self._expand_ladder(cleaned_data):
            return
        missing = [
            name
            for name in ("upsilon", "temperatures", "proposal_covs")
            if cleaned_data.get(name) is None
        ]
        for name in missing:
            self.add_error(name, f"{name} is required for run-it.")
        if missing:
            return
        covs = cleaned_data["proposal_covs"]
        if not isinstance(covs, list):
            self.add_error("proposal_covs", "proposal_covs must be a list of matrices.")
            return
        matrices = [_as_matrix(cov) for cov in covs]
        if any(m is None or m.shape != (dim, dim) for m in matrices):
            self.add_error(
                "proposal_covs", f"Each proposal covariance must be {dim}x{dim}."
            )
            return
        try:
            ladder = LadderConfig(
                temperatures=cleaned_data["temperatures"],
                upsilon=cleaned_data["upsilon"],
                proposal_covs=matrices,
                steps=steps,
                burn_in=burn_in,
            )
        except ValidationError as error:
            self.add_error("proposal_covs", error)
            return
        x0 = cleaned_data.get("x0")
        if x0 is not None and _shape(x0) not in ((dim,), (ladder.levels, dim)):
            self.add_error(
                "x0",
                f"x0 must hold {dim} numbers or one such list per level "
                f"({ladder.levels}).",
            )

    def _expand_ladder(self, cleaned_data):
        """Replace the t_max/levels shorthand by the geometric temperatures"""
        t_max, levels = cleaned_data.get("t_max"), cleaned_data.get("levels")
        if t_max is None and levels is None:
            return True
        if cleaned_data.get("temperatures") is not None:
            self.add_error("t_max", "Give either temperatures or t_max and levels.")
            return False
        if t_max is None or levels is None:
            missing = "t_max" if t_max is None else "levels"
            self.add_error(missing, "t_max and levels must be given together.")
            return False
        try:
            cleaned_data["temperatures"] = ladder_temperatures(t_max, levels)
        except ValidationError as error:
            self.add_error("t_max", error)
            return False
        cleaned_data["t_max"] = cleaned_data["levels"] = None
        return True

    def _check_diagnose_proposal(self, cleaned_data, dim):
        covs = cleaned_data.get("proposal_covs")
        if covs is None and self.data.get("proposal_covs") != []:
            return
        matrices = [_as_matrix(cov) for cov in covs] if isinstance(covs, list) else []
        if not matrices or any(m is None or m.shape != (dim, dim) for m in matrices):
            self.add_error(
                "proposal_covs",
                f"proposal_covs must be a non-empty list of {dim}x{dim} matrices.",
            )
            return
        for index, matrix in enumerate(matrices):
            try:
                validate_spd(matrix, name=f"proposal_covs[{index}]")
            except ValidationError as error:
                self.add_error("proposal_covs", error)

    def _check_test_points(self, cleaned_data, dim):
        points = cleaned_data.get("test_points")
        if points is None:
            return
        shape = _shape(points)
        if len(shape) != 2 or shape[0] == 0 or shape[1] != dim:
            self.add_error(
                "test_points", f"test_points must be a non-empty list of {dim}-vectors."
            )


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _shape(value):
    try:
        array = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        return None
    return array.shape


def _as_matrix(value):
    shape = _shape(value)
    if shape is None or len(shape) != 2:
        return None
    return np.asarray(value, dtype=float)


def _key_line(text, key):
    match = re.search(rf'"{re.escape(key)}"\s*:', text)
    if match is None:
        return None
    return text.count("\n", 0, match.start()) + 1


def parse_config(text, command=None) -> RunConfig:
    """
    Parse and validate a JSON run configuration

    Args:
        text: JSON document
        command: Subcommand given on the command line; must agree with the
            document's ``command`` key when both are present

    Returns:
        RunConfig

    Raises:
        ValidationError: Malformed JSON (with line and column), unknown keys
            or constraint violations (with line and field)
    """
    try:
        document = json.loads(text)
    except json.JSONDecodeError as error:
        raise ValidationError(
            f"Malformed config at line {error.lineno}, column {error.colno}: "
            f"{error.msg}."
        )
    if not isinstance(document, dict):
        raise ValidationError("Config must be a JSON object.")

    unknown = sorted(set(document) - set(RunConfig.field_names()))
    if unknown:
        raise ValidationError(
            [
                f"line {_key_line(text, key)}: unknown key {key!r}."
                for key in unknown
            ]
        )
    if command is not None:
        if document.get("command", command) != command:
            raise ValidationError(
                f"line {_key_line(text, 'command')}: config is for "
                f"{document['command']!r}, not {command!r}."
            )
        document = {**document, "command": command}

    form = RunConfigForm(data=document)
    if not form.is_valid():
        messages = []
        for field, errors in form.errors.items():
            line = _key_line(text, field)
            where = f"line {line}, field {field!r}" if line else f"field {field!r}"
            messages.extend(f"{where}: {message}" for message in errors)
        raise ValidationError(messages)

    values = {k: v for k, v in form.cleaned_data.items() if v is not None}
    return RunConfig(**values)


def emit_config(cfg: RunConfig) -> str:
    """Canonical JSON: sorted keys, two-space indent, trailing newline"""
    return json.dumps(cfg.as_dict(), sort_keys=True, indent=2) + "\n"


def config_hash(cfg: RunConfig) -> str:
    return hashlib.sha256(emit_config(cfg).encode("utf-8")).hexdigest()
