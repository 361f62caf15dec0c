APP_NAME = "sapers"
VERSION = "0.3.0"
LICENSE = "AGPL-3.0"
