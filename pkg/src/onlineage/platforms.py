"""The closed set of mention platforms and their canonical column order."""

PLATFORMS: tuple[str, ...] = (
    "mendeley",
    "citeulike",
    "connotea",
    "twitter",
    "patent",
    "facebook",
    "blogs",
    "wikipedia",
    "stackoverflow",
    "syllabi",
    "policy",
    "news",
    "googleplus",
    "f1000",
    "reddit",
    "video",
    "pinterest",
    "peer_review",
    "weibo",
    "linkedin",
    "misc",
)

N_PLATFORMS = len(PLATFORMS)

PLATFORM_INDEX: dict[str, int] = {name: i for i, name in enumerate(PLATFORMS)}


def platform_index(name: str) -> int:
    try:
        return PLATFORM_INDEX[name]
    except KeyError:
        raise KeyError(f"unknown platform {name!r}") from None
