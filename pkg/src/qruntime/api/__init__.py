from .auth import StaticTokenVerifier, TokenVerifier, load_verifier
from .service import HTTP_STATUS, create_app

__all__ = ["StaticTokenVerifier", "TokenVerifier", "load_verifier", "HTTP_STATUS", "create_app"]
