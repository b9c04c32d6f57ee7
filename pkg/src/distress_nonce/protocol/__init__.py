"""Enrolment and distress protocols among User, Webserver and DCP."""
from .messages import MsgType, ProtocolMessage
from .parties import Dcp, ForwardOutcome, PageEmbed, User, Webserver
from .records import DistressEvent, EventLog, ServerRecord, UserCredentials, UserRecord

__all__ = [
    "Dcp", "DistressEvent", "EventLog", "ForwardOutcome", "MsgType", "PageEmbed",
    "ProtocolMessage", "ServerRecord", "User", "UserCredentials", "UserRecord", "Webserver",
]
