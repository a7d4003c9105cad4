from typing import Any, Generic, TypeVar

from pydantic import BaseModel

DataType = TypeVar("DataType")


class BaseResponseBody(BaseModel, Generic[DataType]):
    data: DataType | None = None


class ErrorDetail(BaseModel):
    status_code: int
    detail: str
    type: str | None = None


class BaseExceptionBody(BaseModel):
    data: ErrorDetail | dict[str, Any] | None = None
