import json
import os
import logging
from datetime import datetime

import pandas as pd

from ..core.errors import ModelFileError
from ..core.semantics import model_from_dict, model_to_dict, to_dot
from ..core.proofs import format_derivation

logger = logging.getLogger(__name__)


class ExportEngine:
    """
    Reads and writes model files, DOT graphs, statistics, soundness reports and derivations

    File system errors propagate as OSError; malformed model files raise ModelFileError.
    """

    def __init__(self, report_dir="./data/reports"):
        self.report_dir = report_dir

    def _default_path(self, stem, suffix):
        os.makedirs(self.report_dir, exist_ok=True)
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        return os.path.join(self.report_dir, f"{stem}_{timestamp}.{suffix}")

    def _target(self, filename, stem, suffix):
        filename = filename or self._default_path(stem, suffix)
        parent = os.path.dirname(filename)
        if parent:
            os.makedirs(parent, exist_ok=True)
        return filename

    def save_model(self, model, filename=None):
        """
        Write a model in the JSON model file schema

        Args:
            model: CielModel to write
            filename: Output filename or None to auto-generate

        Returns:
            Path to exported file
        """
        filename = self._target(filename, "model", "json")
        with open(filename, "w", encoding="utf-8") as f:
            json.dump(model_to_dict(model), f, indent=2)
        logger.info(f"Saved model with {len(model.worlds)} worlds to {filename}")
        return filename

    def load_model(self, filename):
        """
        Read a model file

        Raises:
            OSError: the file cannot be opened
            ModelFileError: the content is not a model file
            ModelValidationError: an agent valuation violates the file's theory
        """
        with open(filename, "r", encoding="utf-8") as f:
            try:
                data = json.load(f)
            except ValueError as e:
                raise ModelFileError(filename, f"invalid JSON: {e}") from e
        if not isinstance(data, dict):
            raise ModelFileError(filename, "expected a JSON object")
        try:
            return model_from_dict(data)
        except KeyError as e:
            raise ModelFileError(filename, f"missing field {e}") from e
        except (TypeError, AttributeError) as e:
            raise ModelFileError(filename, f"malformed entry: {e}") from e

    def export_dot(self, model, filename=None):
        """Write the Graphviz rendering of a model"""
        filename = self._target(filename, "model", "dot")
        with open(filename, "w", encoding="utf-8") as f:
            f.write(to_dot(model))
        logger.info(f"Exported DOT graph to {filename}")
        return filename

    def export_statistics_csv(self, statistics, filename=None, formula=None):
        """
        Append decision statistics as one CSV row

        Args:
            statistics: Mapping from statistic name to value
            filename: Output filename or None to auto-generate
            formula: Formula text recorded next to the statistics

        Returns:
            Path to exported file, or None when there is nothing to write
        """
        if not statistics:
            logger.warning("No statistics to export")
            return None

        row = {"timestamp": datetime.now().isoformat()}
        if formula is not None:
            row["formula"] = formula
        row.update(statistics)
        df = pd.DataFrame([row])

        filename = self._target(filename, "statistics", "csv")
        exists = os.path.exists(filename)
        df.to_csv(filename, mode="a" if exists else "w", header=not exists, index=False)
        logger.info(f"Exported statistics to {filename}")
        return filename

    def export_soundness_report(self, records, filename=None):
        """
        Export soundness suite records to CSV

        Args:
            records: One dictionary per (schema, instance)
            filename: Output filename or None to auto-generate

        Returns:
            Path to exported file, or None when there are no records
        """
        if not records:
            logger.warning("No soundness records to export")
            return None

        df = pd.DataFrame(records)
        filename = self._target(filename, "soundness", "csv")
        df.to_csv(filename, index=False)
        logger.info(f"Exported {len(df)} soundness records to {filename}")
        return filename

    def export_derivation(self, derivation, filename=None):
        """Write a derivation in the proof file format"""
        filename = self._target(filename, "derivation", "prf")
        with open(filename, "w", encoding="utf-8") as f:
            f.write(format_derivation(derivation))
        logger.info(f"Exported derivation of {len(derivation.lines)} lines to {filename}")
        return filename
