from .store import (
    CatalogStore,
    Forbidden,
    InputError,
    NotFound,
    RebuildReport,
    RegistryError,
    RegistryRecord,
    Rejected,
    SearchHit,
    SearchQuery,
    country_iri,
    new_record_id,
    rebuild_index,
)

__all__ = [
    "CatalogStore",
    "Forbidden",
    "InputError",
    "NotFound",
    "RebuildReport",
    "RegistryError",
    "RegistryRecord",
    "Rejected",
    "SearchHit",
    "SearchQuery",
    "country_iri",
    "new_record_id",
    "rebuild_index",
]
