# message-estimator - Median selection subset aggregation for distributed sparse regression.
# Copyright (C) 2026 The message-estimator developers

# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.

# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.

# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.

"""
Define the custom exceptions of message-estimator.

Every exception carries the exit code used by the command line interface.
"""
from typing import Optional


class MessageError(Exception):
    """
    Base exception for message-estimator.
    """

    exit_code: int = 1  #: Exit code of the command line interface.

    def __init__(self, message: str) -> None:
        """
        Args:
            message (str): error message.
        """
        super().__init__(message)


class ConfigError(MessageError):
    """
    Invalid configuration or parameters.
    """

    exit_code = 2


class DataError(MessageError):
    """
    Invalid or unreadable data.
    """

    exit_code = 3
    row: Optional[int]  #: 1-based data row of the faulty cell, if known.
    column: Optional[str]  #: Name of the faulty column, if known.

    def __init__(
        self, message: str, row: Optional[int] = None, column: Optional[str] = None
    ) -> None:
        """
        Args:
            message (str): error message.
            row (Optional[int], optional): 1-based data row. Defaults to None.
            column (Optional[str], optional): column name. Defaults to None.
        """
        super().__init__(message)
        self.row = row
        self.column = column


class NumericalError(MessageError):
    """
    Numerical failure: singular or ill-conditioned systems, enumeration bounds.
    """

    exit_code = 4
    subset: Optional[int]  #: Subset on which the failure happened, if any.

    def __init__(self, message: str, subset: Optional[int] = None) -> None:
        """
        Args:
            message (str): error message.
            subset (Optional[int], optional): subset id. Defaults to None.
        """
        super().__init__(message)
        self.subset = subset
