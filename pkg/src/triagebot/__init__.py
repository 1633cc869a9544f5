"""Customer-support triage chatbot engine.

A dialog-state machine with pluggable handlers, a binary "enough context"
gate, a contact-reason classifier fusing text with tabular user-relationship
features, and department routing with confidence thresholding.
"""

__version__ = "0.1.0"
