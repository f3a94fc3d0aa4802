"""Setup tools configuration for the bonnetlab CLI."""

import setuptools
import site

site.ENABLE_USER_SITE = True
setuptools.setup()
