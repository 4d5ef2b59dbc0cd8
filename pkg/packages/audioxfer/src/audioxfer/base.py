"""Base schema shared by every configuration model."""

from pydantic import BaseModel, ConfigDict


class BaseSchema(BaseModel):
    """Base schema with common configuration.

    Unknown keys are rejected so that a typo in a config file fails loudly
    instead of silently falling back to a default.
    """

    model_config = ConfigDict(
        use_enum_values=True,
        populate_by_name=True,
        extra="forbid",
    )
