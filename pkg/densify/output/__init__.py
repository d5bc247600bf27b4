from densify.output.file_sink import ResultSink, format_float, portable_config

__all__ = ["ResultSink", "format_float", "portable_config"]
