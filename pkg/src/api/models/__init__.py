"""
Pydantic report models; dumped with model_dump(mode="json") in declaration order.
"""
