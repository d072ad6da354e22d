from linknet.cli import main

raise SystemExit(main())
