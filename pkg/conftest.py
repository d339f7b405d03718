import importlib.util

# the embedding classifier suite must run on its own; extractor tests only
# collect when the extractor package and its ML stack are installed
collect_ignore_glob = []
if any(
    importlib.util.find_spec(name) is None
    for name in ("embext", "torch", "transformers", "scipy")
):
    collect_ignore_glob.append("extractor/tests/*")
