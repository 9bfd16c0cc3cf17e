SCHEMA_VERSION = 4

DERIVED_COLUMNS = {
    "value_zscore": ("value", "standardize"),
    "value_rank": ("value", "rank"),
}
