"""HTTP service: pydantic schemas and the FastAPI application (``perception_monitor.api.app``)."""
