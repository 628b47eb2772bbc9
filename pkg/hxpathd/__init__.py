"""hxpathd - proof toolkit for hybrid XPath with data."""
__version__ = "0.1.0"
