"""Small column-table container shared by the report-producing modules."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ReportTable:
    name: str
    columns: tuple
    rows: list

    def column(self, name):
        i = self.columns.index(name)
        return np.array([row[i] for row in self.rows])

    def __len__(self):
        return len(self.rows)
