"""ADHM data, hat construction, Darboux coordinates and the necklace algebra."""
