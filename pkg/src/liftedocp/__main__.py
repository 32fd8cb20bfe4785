from .benchcli import main

main()
