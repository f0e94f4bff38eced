"""Static privacy-compliance checking for third-party libraries and host apps.

Pipeline, end to end: parse a textual IR of decompiled code (`ir`), build a
function call graph from entry points (`callgraph`), trace personal
information from data-of-interest call sites (`dataflow`), ingest privacy
policies into an annotated sentence format (`policy_ingest`), abstract the
sentences into data-usage tuples (`adup`), classify app/TPL data interactions
(`interaction`), check disclosures and score against golden labels
(`compliance`), and estimate how findings travel through dependency chains
(`propagation`).  `cli` wires the pieces into subcommands.
"""

__version__ = "0.1.0"
